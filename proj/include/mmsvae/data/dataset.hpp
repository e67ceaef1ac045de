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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "mmsvae/numerics/types.hpp"

namespace mmsvae::data {

// Binary (or small-count) sparse matrix, one row per user or item.
using SparseMatrix = Eigen::SparseMatrix<real, Eigen::RowMajor, int>;

struct IngestionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RatingRecord {
    int user = 0;
    int item = 0;
    double rating = 0.0;
};

struct ReviewRecord {
    int user = 0;
    int item = 0;
    std::vector<int> keyphrases;
};

// Ratings with dense, reindexed ids. Reviews carry keyphrase ids into
// `vocabulary`.
struct RatingsTable {
    std::vector<std::string> user_names;
    std::vector<std::string> item_names;
    std::vector<std::string> vocabulary;
    std::vector<RatingRecord> ratings;
    std::vector<ReviewRecord> reviews;

    int num_users() const { return static_cast<int>(user_names.size()); }
    int num_items() const { return static_cast<int>(item_names.size()); }
    int num_keyphrases() const { return static_cast<int>(vocabulary.size()); }
};

// r(u, i) = 1 iff the (maximum) rating of (u, i) is strictly above threshold.
SparseMatrix binarize(const RatingsTable& table, double threshold);

struct SplitRatios {
    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;
};

struct InteractionSplit {
    SparseMatrix train;
    SparseMatrix validation;
    SparseMatrix test;
    // Users kept entirely in train because they had fewer than 3 positives.
    std::vector<int> small_users;
};

// Per-user random partition of each row's positives.
InteractionSplit split_interactions(const SparseMatrix& interactions, const SplitRatios& ratios,
                                    std::uint64_t seed);

struct KeyphraseMatrices {
    SparseMatrix user_counts;  // |U| x |K| number of reviews mentioning k
    SparseMatrix item_counts;  // |I| x |K|
    SparseMatrix user;         // binary K
    SparseMatrix item;         // binary K^I
};

// Builds keyphrase matrices from the reviews accepted by `include`, which
// receives (user, item) and returns whether the review counts.
template <typename Pred>
KeyphraseMatrices build_keyphrase_matrices(const RatingsTable& table, Pred include);

KeyphraseMatrices build_keyphrase_matrices_from(const RatingsTable& table,
                                                const std::vector<const ReviewRecord*>& reviews);

// Fraction of reviews mentioning at least one keyphrase.
double keyphrase_coverage(const RatingsTable& table);

// Case-insensitive whole-token match of vocabulary terms in raw text.
// Multi-word terms match consecutive tokens. Returns sorted unique ids.
std::vector<int> match_keyphrases(const std::string& text, const std::vector<std::string>& vocabulary);

enum class Observation : std::uint8_t { Both, ROnly, KOnly };

const char* to_string(Observation o);

using ObservationMask = std::vector<Observation>;

// Fraction p of users observe both modalities; the rest is split evenly
// between r-only and k-only (r-only takes the odd user).
ObservationMask mask_modalities(int num_users, double fully_observed_fraction, std::uint64_t seed);

Matrix l2_normalize_rows(const Matrix& m);
SparseMatrix l2_normalize_rows(const SparseMatrix& m);

// Dense copy of the selected rows, one column per selected row.
Matrix rows_as_columns(const SparseMatrix& m, const std::vector<int>& rows);

std::vector<int> row_indices(const SparseMatrix& m, int row);

struct SplitManifest {
    int version = 1;
    std::uint64_t seed = 0;
    SplitRatios ratios;
    double threshold = 3.5;
    int num_users = 0;
    int num_items = 0;
    int num_keyphrases = 0;
    std::array<long, 3> interactions{0, 0, 0};
};

struct DatasetStats {
    int num_users = 0;
    int num_items = 0;
    long num_interactions = 0;
    double sparsity = 0.0;  // fraction of non-zero entries
    int num_keyphrases = 0;
    double keyphrase_coverage = 0.0;
    double avg_keyphrases_per_review = 0.0;
};

// Everything downstream consumes: the three interaction splits plus the
// train-side keyphrase matrices and the held-out user keyphrase rows used as
// explanation ground truth.
struct DatasetSplit {
    SparseMatrix train;
    SparseMatrix validation;
    SparseMatrix test;
    KeyphraseMatrices keyphrases;
    SparseMatrix test_user_keyphrases;
    std::vector<double> keyphrase_popularity;  // train review counts per keyphrase
    std::vector<std::string> user_names;
    std::vector<std::string> item_names;
    std::vector<std::string> vocabulary;
    SplitManifest manifest;
    DatasetStats stats;

    int num_users() const { return static_cast<int>(train.rows()); }
    int num_items() const { return static_cast<int>(train.cols()); }
    int num_keyphrases() const { return static_cast<int>(vocabulary.size()); }
};

DatasetStats compute_stats(const RatingsTable& table, const SparseMatrix& interactions);

// binarize -> split -> keyphrase matrices from train-side reviews. A review
// is train-side unless its (user, item) pair is a validation or test positive.
DatasetSplit build_dataset(const RatingsTable& table, double threshold, const SplitRatios& ratios,
                           std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

// --- template implementation ---

template <typename Pred>
KeyphraseMatrices build_keyphrase_matrices(const RatingsTable& table, Pred include) {
    std::vector<const ReviewRecord*> kept;
    for (const auto& r : table.reviews)
        if (include(r.user, r.item)) kept.push_back(&r);
    return build_keyphrase_matrices_from(table, kept);
}

}  // namespace mmsvae::data
