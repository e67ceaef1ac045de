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

#include "mmsvae/eval/evaluate.hpp"

#include <fstream>
#include <iomanip>

namespace mmsvae::eval {

namespace {

constexpr std::size_t kChunk = 256;

struct Accumulator {
    std::vector<double> values;
    void add(double v) { values.push_back(v); }
};

}  // namespace

std::vector<MetricRow> ranking_metrics(const std::string& task, const std::string& method, const UserScorer& scorer,
                                       const data::SparseMatrix* excluded, const data::SparseMatrix& relevant,
                                       const std::vector<int>& cutoffs) {
    std::vector<int> users;
    std::size_t skipped = 0;
    for (int u = 0; u < relevant.outerSize(); ++u) {
        if (relevant.innerVector(u).nonZeros() > 0) users.push_back(u);
        else ++skipped;
    }
    const int width = static_cast<int>(relevant.cols());

    Accumulator rprec, ndcg_full;
    std::vector<Accumulator> ndcg(cutoffs.size()), map(cutoffs.size()), prec(cutoffs.size()), rec(cutoffs.size());
    for (std::size_t start = 0; start < users.size(); start += kChunk) {
        const std::vector<int> chunk(users.begin() + static_cast<long>(start),
                                     users.begin() + static_cast<long>(std::min(users.size(), start + kChunk)));
        const Matrix scores = scorer(chunk);
        require_shape(scores.rows() == width && scores.cols() == static_cast<Eigen::Index>(chunk.size()),
                      "ranking_metrics: scorer returned the wrong shape");
        for (std::size_t j = 0; j < chunk.size(); ++j) {
            const int u = chunk[j];
            std::vector<char> mask;
            if (excluded) mask = exclusion_mask(width, data::row_indices(*excluded, u));
            const RankedList ranked = top_n(scores.col(static_cast<Eigen::Index>(j)), width, excluded ? &mask : nullptr);
            const auto rel = data::row_indices(relevant, u);
            rprec.add(r_precision(ranked.ids, rel));
            ndcg_full.add(ndcg_at(ranked.ids, rel, width));
            for (std::size_t c = 0; c < cutoffs.size(); ++c) {
                ndcg[c].add(ndcg_at(ranked.ids, rel, cutoffs[c]));
                map[c].add(map_at(ranked.ids, rel, cutoffs[c]));
                prec[c].add(precision_at(ranked.ids, rel, cutoffs[c]));
                rec[c].add(recall_at(ranked.ids, rel, cutoffs[c]));
            }
        }
    }

    std::vector<MetricRow> rows;
    auto emit = [&](const char* metric, int n, const Accumulator& acc) {
        rows.push_back({task, method, metric, n, mean_ci95(acc.values), skipped});
    };
    emit("R-Precision", 0, rprec);
    emit("NDCG", 0, ndcg_full);
    for (std::size_t c = 0; c < cutoffs.size(); ++c) {
        emit("NDCG", cutoffs[c], ndcg[c]);
        emit("MAP", cutoffs[c], map[c]);
        emit("Precision", cutoffs[c], prec[c]);
        emit("Recall", cutoffs[c], rec[c]);
    }
    return rows;
}

Vector item_popularity(const data::SparseMatrix& train) {
    Vector pop = Vector::Zero(train.cols());
    for (int u = 0; u < train.outerSize(); ++u)
        for (data::SparseMatrix::InnerIterator it(train, u); it; ++it) pop(it.col()) += 1;
    return pop;
}

const char* to_string(InputSource source) {
    switch (source) {
        case InputSource::Interactions: return "r";
        case InputSource::Keyphrases: return "k";
        case InputSource::Joint: return "joint";
    }
    return "?";
}

std::vector<MetricRow> recommendation_metrics(const MmsVae& model, const data::DatasetSplit& ds,
                                              const data::SparseMatrix& heldout, const std::vector<int>& cutoffs,
                                              InputSource source) {
    const UserScorer scorer = [&](const std::vector<int>& users) {
        const Matrix r = data::rows_as_columns(ds.train, users);
        const Matrix k = data::rows_as_columns(ds.keyphrases.user, users);
        switch (source) {
            case InputSource::Interactions: return model.decode_r(model.encode_r(r).mu);
            case InputSource::Keyphrases: return model.decode_r(model.encode_k(k).mu);
            case InputSource::Joint: break;
        }
        return model.decode_r(model.encode_joint(r, k, Observation::Both).mu);
    };
    return ranking_metrics("recommendation", std::string("MMS-VAE/") + to_string(source), scorer, &ds.train, heldout,
                           cutoffs);
}

std::vector<MetricRow> popularity_metrics(const data::DatasetSplit& ds, const data::SparseMatrix& heldout,
                                          const std::vector<int>& cutoffs) {
    const Vector pop = item_popularity(ds.train);
    const UserScorer scorer = [&](const std::vector<int>& users) {
        return Matrix(pop.replicate(1, static_cast<Eigen::Index>(users.size())));
    };
    return ranking_metrics("recommendation", "POP", scorer, &ds.train, heldout, cutoffs);
}

std::vector<MetricRow> explanation_metrics(const MmsVae& model, const data::DatasetSplit& ds,
                                           const std::vector<int>& cutoffs) {
    const int nk = ds.num_keyphrases();
    // Counts dominate; the corpus popularity term only breaks ties.
    Vector tie = Vector::Zero(nk);
    double max_pop = 0.0;
    for (int k = 0; k < nk; ++k) max_pop = std::max(max_pop, ds.keyphrase_popularity[static_cast<std::size_t>(k)]);
    for (int k = 0; k < nk; ++k)
        tie(k) = max_pop > 0 ? 0.5 * ds.keyphrase_popularity[static_cast<std::size_t>(k)] / max_pop : 0.0;

    const UserScorer model_scorer = [&](const std::vector<int>& users) {
        const Matrix r = data::rows_as_columns(ds.train, users);
        const Matrix k = data::rows_as_columns(ds.keyphrases.user, users);
        return model.decode_k(model.encode_joint(r, k, Observation::Both).mu);
    };
    const UserScorer user_pop = [&](const std::vector<int>& users) {
        Matrix s = data::rows_as_columns(ds.keyphrases.user_counts, users);
        s.colwise() += tie;
        return s;
    };
    const UserScorer item_pop = [&](const std::vector<int>& users) {
        Matrix s(nk, static_cast<Eigen::Index>(users.size()));
        for (std::size_t j = 0; j < users.size(); ++j) {
            const auto items = data::row_indices(ds.test, users[j]);
            Vector col = tie;
            if (!items.empty()) col += data::rows_as_columns(ds.keyphrases.item_counts, items).rowwise().sum();
            s.col(static_cast<Eigen::Index>(j)) = col;
        }
        return s;
    };

    std::vector<MetricRow> rows;
    for (const auto& [name, scorer] : {std::pair<const char*, const UserScorer*>{"MMS-VAE", &model_scorer},
                                       {"UserPop", &user_pop},
                                       {"ItemPop", &item_pop}}) {
        auto part = ranking_metrics("explanation", name, *scorer, nullptr, ds.test_user_keyphrases, cutoffs);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "task,method,metric,n,mean,ci_low,ci_high,count,skipped\n" << std::setprecision(10);
    for (const auto& r : rows)
        out << r.task << ',' << r.method << ',' << r.metric << ',' << r.n << ',' << r.value.mean << ','
            << r.value.ci_low << ',' << r.value.ci_high << ',' << r.value.count << ',' << r.skipped << '\n';
}

}  // namespace mmsvae::eval
