// Copyright 2026 The mmsvae Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "mmsvae/eval/evaluate.hpp"
#include "mmsvae/eval/metrics.hpp"
#include "mmsvae/model/trainer.hpp"
#include "support.hpp"

namespace mmsvae::eval {
namespace {

const std::vector<int> kRanked{4, 2, 7, 1, 9};

TEST(Metrics, ToyValues) {
    const std::vector<int> rel{2, 9, 5};
    // hits at positions 2 and 5
    EXPECT_DOUBLE_EQ(precision_at(kRanked, rel, 2), 0.5);
    EXPECT_DOUBLE_EQ(precision_at(kRanked, rel, 5), 0.4);
    EXPECT_DOUBLE_EQ(recall_at(kRanked, rel, 5), 2.0 / 3.0);
    const double dcg = 1 / std::log2(3.0) + 1 / std::log2(6.0);
    const double idcg = 1 + 1 / std::log2(3.0) + 1 / std::log2(4.0);
    EXPECT_DOUBLE_EQ(ndcg_at(kRanked, rel, 5), dcg / idcg);
    EXPECT_DOUBLE_EQ(ndcg_at(kRanked, rel, 1), 0.0);
    EXPECT_DOUBLE_EQ(map_at(kRanked, rel, 5), (0.5 + 0.4) / 3.0);
    EXPECT_DOUBLE_EQ(map_at(kRanked, rel, 2), 0.5 / 2.0);
    EXPECT_DOUBLE_EQ(r_precision(kRanked, rel), 1.0 / 3.0);
}

TEST(Metrics, PerfectRankingScoresOne) {
    const std::vector<int> rel{4, 2};
    EXPECT_DOUBLE_EQ(ndcg_at(kRanked, rel, 5), 1.0);
    EXPECT_DOUBLE_EQ(map_at(kRanked, rel, 5), 1.0);
    EXPECT_DOUBLE_EQ(r_precision(kRanked, rel), 1.0);
}

TEST(Metrics, FallingMapSign) {
    const std::vector<int> before{1, 2, 3, 4}, after{3, 4, 1, 2}, affected{1, 2};
    EXPECT_GT(falling_map(before, after, affected, 4), 0.0);
    EXPECT_LT(falling_map(after, before, affected, 4), 0.0);
    EXPECT_DOUBLE_EQ(falling_map(before, before, affected, 4), 0.0);
    EXPECT_DOUBLE_EQ(falling_map(before, after, affected, 4), 1.0 - (1.0 / 3 + 2.0 / 4) / 2);
}

TEST(Metrics, ConfidenceInterval) {
    const std::vector<double> v{1, 2, 3, 4, 5};
    const auto e = mean_ci95(v);
    EXPECT_DOUBLE_EQ(e.mean, 3.0);
    EXPECT_EQ(e.count, 5u);
    const double half = 1.959963984540054 * std::sqrt(2.5) / std::sqrt(5.0);
    EXPECT_NEAR(e.ci_high - e.mean, half, 1e-12);
    EXPECT_NEAR(e.mean - e.ci_low, half, 1e-12);
    const std::vector<double> one{7};
    EXPECT_DOUBLE_EQ(mean_ci95(one).ci_low, 7.0);
}

TEST(Evaluate, RankingMetricsExcludeAndSkip) {
    data::SparseMatrix relevant(3, 4), excluded(3, 4);
    relevant.insert(0, 1) = 1;
    relevant.insert(1, 3) = 1;
    excluded.insert(0, 0) = 1;
    relevant.makeCompressed();
    excluded.makeCompressed();
    const UserScorer scorer = [](const std::vector<int>& users) {
        Matrix s(4, static_cast<Eigen::Index>(users.size()));
        for (Eigen::Index j = 0; j < s.cols(); ++j) s.col(j) << 4, 3, 2, 1;
        return s;
    };
    const auto rows = ranking_metrics("t", "m", scorer, &excluded, relevant, {1});
    auto find = [&](const std::string& metric, int n) {
        for (const auto& r : rows)
            if (r.metric == metric && r.n == n) return r;
        return MetricRow{};
    };
    // user 0: item 0 excluded so item 1 ranks first; user 1: item 3 ranks last
    EXPECT_DOUBLE_EQ(find("Precision", 1).value.mean, 0.5);
    EXPECT_EQ(find("Precision", 1).value.count, 2u);
    EXPECT_EQ(find("NDCG", 1).skipped, 1u);
    EXPECT_DOUBLE_EQ(find("R-Precision", 0).value.mean, 0.5);
}

TEST(Evaluate, PopularityAndCsv) {
    const auto ds = testing::fixture_split();
    const auto pop = item_popularity(ds.train);
    ASSERT_EQ(pop.size(), ds.num_items());
    EXPECT_DOUBLE_EQ(pop.sum(), static_cast<double>(ds.train.nonZeros()));
    const auto rows = popularity_metrics(ds, ds.test, {5, 10});
    EXPECT_FALSE(rows.empty());
    const auto dir = testing::scratch_dir("metrics_csv");
    write_metrics_csv(dir / "m.csv", rows);
    std::ifstream in(dir / "m.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "task,method,metric,n,mean,ci_low,ci_high,count,skipped");
}

TEST(Evaluate, ExplanationBeatsNothingAndReportsBaselines) {
    const auto ds = testing::fixture_split();
    auto cfg = testing::fixture_train_config();
    cfg.epochs = 30;
    const auto model = train_model(ds, cfg).model;
    const auto rows = explanation_metrics(model, ds, {5});
    std::set<std::string> methods;
    for (const auto& r : rows) {
        methods.insert(r.method);
        EXPECT_GE(r.value.mean, 0.0);
        EXPECT_LE(r.value.mean, 1.0);
    }
    EXPECT_EQ(methods, (std::set<std::string>{"MMS-VAE", "UserPop", "ItemPop"}));
}

}  // namespace
}  // namespace mmsvae::eval
