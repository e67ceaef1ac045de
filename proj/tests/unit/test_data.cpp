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

#include <fstream>
#include <set>
#include <sstream>

#include "mmsvae/data/dataset.hpp"
#include "mmsvae/data/fixture.hpp"
#include "mmsvae/data/io.hpp"
#include "support.hpp"

namespace mmsvae::data {
namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

RatingsTable small_table() {
    RatingsTable t;
    t.user_names = {"a", "b"};
    t.item_names = {"x", "y", "z"};
    t.vocabulary = {"hoppy", "dark"};
    t.ratings = {{0, 0, 4.0}, {0, 1, 3.5}, {0, 2, 5.0}, {1, 0, 2.0}, {1, 1, 3.6}, {1, 1, 1.0}};
    t.reviews = {{0, 0, {0}}, {0, 2, {0, 1}}, {1, 1, {1}}};
    return t;
}

TEST(Binarize, StrictlyAboveThresholdUsingMaximum) {
    const SparseMatrix r = binarize(small_table(), 3.5);
    EXPECT_EQ(r.coeff(0, 0), 1);
    EXPECT_EQ(r.coeff(0, 1), 0);
    EXPECT_EQ(r.coeff(0, 2), 1);
    EXPECT_EQ(r.coeff(1, 0), 0);
    EXPECT_EQ(r.coeff(1, 1), 1);
    EXPECT_THROW(binarize(small_table(), 7.0), ConfigError);
    EXPECT_THROW(binarize(RatingsTable{}, 3.5), IngestionError);
}

TEST(Split, PartitionsEachUsersPositives) {
    const auto ds = testing::fixture_split();
    const SparseMatrix all = binarize(testing::fixture_table(), 3.5);
    for (int u = 0; u < all.rows(); ++u) {
        const auto tr = row_indices(ds.train, u), va = row_indices(ds.validation, u), te = row_indices(ds.test, u);
        std::set<int> seen;
        for (const auto* part : {&tr, &va, &te})
            for (int i : *part) EXPECT_TRUE(seen.insert(i).second) << "user " << u << " item " << i;
        EXPECT_EQ(seen.size(), row_indices(all, u).size());
        const double n = static_cast<double>(seen.size());
        if (n >= 3) {
            EXPECT_NEAR(te.size(), n * 0.2, 0.51);
            EXPECT_NEAR(va.size(), n * 0.2, 0.51);
        }
    }
}

TEST(Split, SmallUsersStayInTrainAndSeedMatters) {
    SparseMatrix m(2, 5);
    m.insert(0, 1) = 1;
    m.insert(0, 3) = 1;
    for (int i = 0; i < 5; ++i) m.insert(1, i) = 1;
    const auto a = split_interactions(m, {}, 1);
    EXPECT_EQ(a.small_users, std::vector<int>{0});
    EXPECT_EQ(row_indices(a.train, 0), (std::vector<int>{1, 3}));
    const auto b = split_interactions(m, {}, 1);
    EXPECT_EQ(row_indices(a.test, 1), row_indices(b.test, 1));
    EXPECT_THROW(split_interactions(m, {0.5, 0.5, 0.5}, 1), ConfigError);
}

TEST(Keyphrases, TrainSideMatricesExcludeHeldOutReviews) {
    const auto table = testing::fixture_table();
    const auto ds = build_dataset(table, 3.5, {}, 0);
    for (const auto& r : table.reviews) {
        const bool held = ds.validation.coeff(r.user, r.item) != 0 || ds.test.coeff(r.user, r.item) != 0;
        if (held || r.keyphrases.empty()) continue;
        for (int k : r.keyphrases) {
            EXPECT_GE(ds.keyphrases.user_counts.coeff(r.user, k), 1);
            EXPECT_EQ(ds.keyphrases.user.coeff(r.user, k), 1);
            EXPECT_EQ(ds.keyphrases.item.coeff(r.item, k), 1);
        }
    }
    for (const auto& r : table.reviews) {
        if (ds.test.coeff(r.user, r.item) == 0) continue;
        for (int k : r.keyphrases) EXPECT_EQ(ds.test_user_keyphrases.coeff(r.user, k), 1);
    }
}

TEST(Keyphrases, CountsAndCoverage) {
    const auto t = small_table();
    const auto km = build_keyphrase_matrices(t, [](int, int) { return true; });
    EXPECT_EQ(km.user_counts.coeff(0, 0), 2);
    EXPECT_EQ(km.user_counts.coeff(0, 1), 1);
    EXPECT_EQ(km.item.coeff(1, 1), 1);
    EXPECT_EQ(km.item.coeff(1, 0), 0);
    EXPECT_DOUBLE_EQ(keyphrase_coverage(t), 1.0);
}

TEST(Keyphrases, TextMatching) {
    const std::vector<std::string> vocab{"hoppy", "dark chocolate", "citrus"};
    EXPECT_EQ(match_keyphrases("Very HOPPY, with dark chocolate notes.", vocab), (std::vector<int>{0, 1}));
    EXPECT_EQ(match_keyphrases("unhoppy dark bitter chocolate", vocab), std::vector<int>{});
    EXPECT_EQ(match_keyphrases("citrus citrus", vocab), std::vector<int>{2});
}

TEST(Observation, MaskFractions) {
    auto count = [](const ObservationMask& m) {
        std::array<int, 3> c{0, 0, 0};
        for (auto o : m) ++c[static_cast<std::size_t>(o)];
        return c;
    };
    EXPECT_EQ(count(mask_modalities(100, 0.5, 3)), (std::array<int, 3>{50, 25, 25}));
    EXPECT_EQ(count(mask_modalities(11, 0.0, 3)), (std::array<int, 3>{0, 6, 5}));
    for (auto o : mask_modalities(10, 1.0, 3)) EXPECT_EQ(o, Observation::Both);
    EXPECT_THROW(mask_modalities(10, 1.5, 3), ConfigError);
}

TEST(Csv, QuotedFields) {
    EXPECT_EQ(split_csv_line(R"(a,"b,c","say ""hi""",)"),
              (std::vector<std::string>{"a", "b,c", "say \"hi\"", ""}));
}

TEST(Csv, MalformedInputsAreReported) {
    const auto dir = testing::scratch_dir("csv_errors");
    EXPECT_THROW(read_ratings_csv(dir / "missing.csv"), IngestionError);
    write_text(dir / "bad_header.csv", "u,i,r\n1,2,3\n");
    EXPECT_THROW(read_ratings_csv(dir / "bad_header.csv"), IngestionError);
    write_text(dir / "bad_rating.csv", "user,item,rating\n1,2,great\n");
    EXPECT_THROW(read_ratings_csv(dir / "bad_rating.csv"), IngestionError);
    write_text(dir / "ok.csv", "user,item,rating\nu1,i1,4\n");
    auto table = read_ratings_csv(dir / "ok.csv");
    table.vocabulary = {"a"};
    write_text(dir / "reviews.csv", "user,item,keyphrase_ids\nu1,i1,5\n");
    EXPECT_THROW(read_reviews_csv(dir / "reviews.csv", table), IngestionError);
    write_text(dir / "reviews2.csv", "user,item,keyphrase_ids\nnobody,i1,0\n");
    EXPECT_THROW(read_reviews_csv(dir / "reviews2.csv", table), IngestionError);
}

TEST(Bundle, RoundTripPreservesEverything) {
    const auto ds = testing::fixture_split();
    const auto dir = testing::scratch_dir("bundle");
    write_bundle(dir, ds);
    const auto back = read_bundle(dir);
    auto same = [](const SparseMatrix& a, const SparseMatrix& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && Matrix(a) == Matrix(b);
    };
    EXPECT_TRUE(same(ds.train, back.train));
    EXPECT_TRUE(same(ds.validation, back.validation));
    EXPECT_TRUE(same(ds.test, back.test));
    EXPECT_TRUE(same(ds.keyphrases.user_counts, back.keyphrases.user_counts));
    EXPECT_TRUE(same(ds.keyphrases.item, back.keyphrases.item));
    EXPECT_TRUE(same(ds.test_user_keyphrases, back.test_user_keyphrases));
    EXPECT_EQ(ds.keyphrase_popularity, back.keyphrase_popularity);
    EXPECT_EQ(ds.item_names, back.item_names);
    EXPECT_EQ(ds.vocabulary, back.vocabulary);
    EXPECT_EQ(ds.manifest.interactions, back.manifest.interactions);

    write_text(dir / "bundle.json", "{\"version\": 99}");
    EXPECT_THROW(read_bundle(dir), IngestionError);
}

TEST(Fixture, ShippedFilesMatchGenerator) {
    const auto table = generate_fixture({});
    const auto dir = testing::scratch_dir("fixture");
    write_ratings_csv(dir / "ratings.csv", table);
    write_reviews_csv(dir / "reviews.csv", table);
    write_vocabulary(dir / "vocab.txt", table.vocabulary);
    const auto shipped = testing::source_dir() / "data" / "fixture";
    for (const char* f : {"ratings.csv", "reviews.csv", "vocab.txt"})
        EXPECT_EQ(slurp(dir / f), slurp(shipped / f)) << f;
}

TEST(Fixture, EveryItemAppearsAndStatsAreSane) {
    const auto ds = testing::fixture_split();
    EXPECT_EQ(ds.num_users(), 200);
    EXPECT_EQ(ds.num_items(), 100);
    EXPECT_EQ(ds.num_keyphrases(), 12);
    EXPECT_GT(ds.stats.keyphrase_coverage, 0.5);
    EXPECT_GT(ds.stats.sparsity, 0.0);
    EXPECT_LT(ds.stats.sparsity, 1.0);
    FixtureConfig bad;
    bad.num_items = 0;
    EXPECT_THROW(generate_fixture(bad), ConfigError);
}

}  // namespace
}  // namespace mmsvae::data
