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

#include "mmsvae/data/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "mmsvae/numerics/rng.hpp"

namespace mmsvae::data {

namespace {

using Triplet = Eigen::Triplet<real, int>;

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
    SparseMatrix m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

std::uint64_t pair_key(int user, int item) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(user)) << 32) |
           static_cast<std::uint32_t>(item);
}

std::unordered_set<std::uint64_t> positive_pairs(const SparseMatrix& m) {
    std::unordered_set<std::uint64_t> out;
    for (int u = 0; u < m.outerSize(); ++u)
        for (SparseMatrix::InnerIterator it(m, u); it; ++it) out.insert(pair_key(u, it.col()));
    return out;
}

SparseMatrix binary_of(const SparseMatrix& counts) {
    SparseMatrix b = counts;
    for (int k = 0; k < b.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(b, k); it; ++it) it.valueRef() = real(1);
    return b;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char ch : text) {
        if (std::isalnum(ch) || ch == '\'' || ch == '-') {
            cur.push_back(static_cast<char>(std::tolower(ch)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

}  // namespace

SparseMatrix binarize(const RatingsTable& table, double threshold) {
    if (table.ratings.empty()) throw IngestionError("binarize: ratings table is empty");
    if (!(threshold >= 1.0 && threshold <= 5.0))
        throw ConfigError("binarize: threshold must lie in [1, 5]");
    std::map<std::uint64_t, double> best;
    for (const auto& r : table.ratings) {
        if (!std::isfinite(r.rating)) throw IngestionError("binarize: non-finite rating");
        if (r.user < 0 || r.user >= table.num_users() || r.item < 0 || r.item >= table.num_items())
            throw IngestionError("binarize: rating refers to an unknown user or item");
        auto [it, inserted] = best.emplace(pair_key(r.user, r.item), r.rating);
        if (!inserted) it->second = std::max(it->second, r.rating);
    }
    std::vector<Triplet> triplets;
    for (const auto& [key, rating] : best) {
        if (rating > threshold)
            triplets.emplace_back(static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu),
                                  real(1));
    }
    return from_triplets(table.num_users(), table.num_items(), triplets);
}

InteractionSplit split_interactions(const SparseMatrix& interactions, const SplitRatios& ratios,
                                    std::uint64_t seed) {
    const double total = ratios.train + ratios.validation + ratios.test;
    if (std::abs(total - 1.0) > 1e-9 || ratios.train < 0 || ratios.validation < 0 || ratios.test < 0)
        throw ConfigError("split ratios must be non-negative and sum to 1");

    std::vector<Triplet> train, val, test;
    InteractionSplit out;
    for (int u = 0; u < interactions.outerSize(); ++u) {
        std::vector<int> items = row_indices(interactions, u);
        const auto n = static_cast<int>(items.size());
        if (n == 0) continue;
        if (n < 3) {
            out.small_users.push_back(u);
            for (int i : items) train.emplace_back(u, i, real(1));
            continue;
        }
        RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(u), 0x5917);
        rng.shuffle(items);
        const int n_test = static_cast<int>(std::lround(n * ratios.test));
        const int n_val = static_cast<int>(std::lround(n * ratios.validation));
        const int n_train = n - n_val - n_test;
        for (int k = 0; k < n; ++k) {
            auto& dst = k < n_train ? train : (k < n_train + n_val ? val : test);
            dst.emplace_back(u, items[static_cast<std::size_t>(k)], real(1));
        }
    }
    const auto rows = static_cast<int>(interactions.rows());
    const auto cols = static_cast<int>(interactions.cols());
    out.train = from_triplets(rows, cols, train);
    out.validation = from_triplets(rows, cols, val);
    out.test = from_triplets(rows, cols, test);
    return out;
}

KeyphraseMatrices build_keyphrase_matrices_from(const RatingsTable& table,
                                                const std::vector<const ReviewRecord*>& reviews) {
    const int n_kp = table.num_keyphrases();
    std::vector<Triplet> user, item;
    for (const ReviewRecord* r : reviews) {
        // Repeated ids within one review count once.
        std::set<int> unique(r->keyphrases.begin(), r->keyphrases.end());
        for (int k : unique) {
            if (k < 0 || k >= n_kp)
                throw IngestionError("keyphrase id " + std::to_string(k) + " is out of vocabulary");
            user.emplace_back(r->user, k, real(1));
            item.emplace_back(r->item, k, real(1));
        }
    }
    KeyphraseMatrices out;
    out.user_counts = from_triplets(table.num_users(), n_kp, user);
    out.item_counts = from_triplets(table.num_items(), n_kp, item);
    out.user = binary_of(out.user_counts);
    out.item = binary_of(out.item_counts);
    return out;
}

double keyphrase_coverage(const RatingsTable& table) {
    if (table.reviews.empty()) return 0.0;
    const auto covered = std::count_if(table.reviews.begin(), table.reviews.end(),
                                       [](const ReviewRecord& r) { return !r.keyphrases.empty(); });
    return static_cast<double>(covered) / static_cast<double>(table.reviews.size());
}

std::vector<int> match_keyphrases(const std::string& text, const std::vector<std::string>& vocabulary) {
    const auto tokens = tokenize(text);
    std::vector<int> found;
    for (std::size_t k = 0; k < vocabulary.size(); ++k) {
        const auto term = tokenize(vocabulary[k]);
        if (term.empty() || term.size() > tokens.size()) continue;
        for (std::size_t s = 0; s + term.size() <= tokens.size(); ++s) {
            if (std::equal(term.begin(), term.end(), tokens.begin() + static_cast<long>(s))) {
                found.push_back(static_cast<int>(k));
                break;
            }
        }
    }
    return found;
}

const char* to_string(Observation o) {
    switch (o) {
        case Observation::Both: return "both";
        case Observation::ROnly: return "r-only";
        case Observation::KOnly: return "k-only";
    }
    return "?";
}

ObservationMask mask_modalities(int num_users, double fully_observed_fraction, std::uint64_t seed) {
    if (!(fully_observed_fraction >= 0.0 && fully_observed_fraction <= 1.0))
        throw ConfigError("fully observed fraction must lie in [0, 1]");
    std::vector<int> order(static_cast<std::size_t>(num_users));
    for (int u = 0; u < num_users; ++u) order[static_cast<std::size_t>(u)] = u;
    RngStream rng(seed);
    rng.shuffle(order);
    const int n_both = static_cast<int>(std::lround(fully_observed_fraction * num_users));
    const int rest = num_users - n_both;
    const int n_r = rest - rest / 2;
    ObservationMask mask(static_cast<std::size_t>(num_users), Observation::Both);
    for (int k = n_both; k < num_users; ++k)
        mask[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] =
            k < n_both + n_r ? Observation::ROnly : Observation::KOnly;
    return mask;
}

Matrix l2_normalize_rows(const Matrix& m) {
    Matrix out = m;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const real n = out.row(i).norm();
        if (n > 0) out.row(i) /= n;
    }
    return out;
}

SparseMatrix l2_normalize_rows(const SparseMatrix& m) {
    SparseMatrix out = m;
    for (int i = 0; i < out.outerSize(); ++i) {
        real sq = 0;
        for (SparseMatrix::InnerIterator it(out, i); it; ++it) sq += it.value() * it.value();
        if (sq <= 0) continue;
        const real n = std::sqrt(sq);
        for (SparseMatrix::InnerIterator it(out, i); it; ++it) it.valueRef() /= n;
    }
    return out;
}

Matrix rows_as_columns(const SparseMatrix& m, const std::vector<int>& rows) {
    Matrix out = Matrix::Zero(m.cols(), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (SparseMatrix::InnerIterator it(m, rows[j]); it; ++it)
            out(it.col(), static_cast<Eigen::Index>(j)) = it.value();
    return out;
}

std::vector<int> row_indices(const SparseMatrix& m, int row) {
    std::vector<int> out;
    for (SparseMatrix::InnerIterator it(m, row); it; ++it)
        if (it.value() != 0) out.push_back(it.col());
    return out;
}

DatasetStats compute_stats(const RatingsTable& table, const SparseMatrix& interactions) {
    DatasetStats s;
    s.num_users = static_cast<int>(interactions.rows());
    s.num_items = static_cast<int>(interactions.cols());
    s.num_interactions = static_cast<long>(interactions.nonZeros());
    const double cells = static_cast<double>(s.num_users) * static_cast<double>(s.num_items);
    s.sparsity = cells > 0 ? static_cast<double>(s.num_interactions) / cells : 0.0;
    s.num_keyphrases = table.num_keyphrases();
    s.keyphrase_coverage = keyphrase_coverage(table);
    if (!table.reviews.empty()) {
        double total = 0;
        for (const auto& r : table.reviews) total += static_cast<double>(r.keyphrases.size());
        s.avg_keyphrases_per_review = total / static_cast<double>(table.reviews.size());
    }
    return s;
}

DatasetSplit build_dataset(const RatingsTable& table, double threshold, const SplitRatios& ratios,
                           std::uint64_t seed, std::vector<std::string>* warnings) {
    SparseMatrix interactions = binarize(table, threshold);
    InteractionSplit parts = split_interactions(interactions, ratios, seed);
    if (warnings) {
        for (int u : parts.small_users)
            warnings->push_back("user " + table.user_names[static_cast<std::size_t>(u)] +
                                " has fewer than 3 positives; kept entirely in train");
    }
    const auto val_pairs = positive_pairs(parts.validation);
    const auto test_pairs = positive_pairs(parts.test);

    DatasetSplit ds;
    ds.keyphrases = build_keyphrase_matrices(table, [&](int u, int i) {
        const auto key = pair_key(u, i);
        return !val_pairs.count(key) && !test_pairs.count(key);
    });
    ds.test_user_keyphrases =
        build_keyphrase_matrices(table, [&](int u, int i) { return test_pairs.count(pair_key(u, i)) > 0; })
            .user;
    ds.keyphrase_popularity.assign(static_cast<std::size_t>(table.num_keyphrases()), 0.0);
    for (int u = 0; u < ds.keyphrases.user_counts.outerSize(); ++u)
        for (SparseMatrix::InnerIterator it(ds.keyphrases.user_counts, u); it; ++it)
            ds.keyphrase_popularity[static_cast<std::size_t>(it.col())] += it.value();

    ds.stats = compute_stats(table, interactions);
    ds.train = std::move(parts.train);
    ds.validation = std::move(parts.validation);
    ds.test = std::move(parts.test);
    ds.user_names = table.user_names;
    ds.item_names = table.item_names;
    ds.vocabulary = table.vocabulary;
    ds.manifest.seed = seed;
    ds.manifest.ratios = ratios;
    ds.manifest.threshold = threshold;
    ds.manifest.num_users = table.num_users();
    ds.manifest.num_items = table.num_items();
    ds.manifest.num_keyphrases = table.num_keyphrases();
    ds.manifest.interactions = {static_cast<long>(ds.train.nonZeros()),
                                static_cast<long>(ds.validation.nonZeros()),
                                static_cast<long>(ds.test.nonZeros())};
    return ds;
}

}  // namespace mmsvae::data
