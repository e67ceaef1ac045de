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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mmsvae/eval/metrics.hpp"
#include "mmsvae/model/trainer.hpp"

namespace mmsvae::eval {

struct MetricRow {
    std::string task;    // recommendation | explanation
    std::string method;
    std::string metric;  // NDCG, R-Precision, MAP, Precision, Recall
    int n = 0;           // cutoff; 0 for the whole list
    Estimate value;
    std::size_t skipped = 0;  // users with an empty relevant set
};

// Scores for a block of users, one column per user.
using UserScorer = std::function<Matrix(const std::vector<int>& users)>;

// Ranks every item not in the user's row of `excluded` and scores it
// against the user's row of `relevant`. Emits R-Precision and full-list
// NDCG, then NDCG, MAP, Precision and Recall at each cutoff.
std::vector<MetricRow> ranking_metrics(const std::string& task, const std::string& method, const UserScorer& scorer,
                                       const data::SparseMatrix* excluded, const data::SparseMatrix& relevant,
                                       const std::vector<int>& cutoffs);

// Train-set item counts.
Vector item_popularity(const data::SparseMatrix& train);

const char* to_string(InputSource source);

std::vector<MetricRow> recommendation_metrics(const MmsVae& model, const data::DatasetSplit& ds,
                                              const data::SparseMatrix& heldout, const std::vector<int>& cutoffs,
                                              InputSource source = InputSource::Interactions);

std::vector<MetricRow> popularity_metrics(const data::DatasetSplit& ds, const data::SparseMatrix& heldout,
                                          const std::vector<int>& cutoffs);

// Keyphrase ranking from decoder_k on the joint train-side encoding,
// against the user's held-out review keyphrases. Baselines: UserPop ranks
// by the user's own train keyphrase counts, ItemPop by the train counts of
// the user's held-out items. Ties fall to corpus popularity, then id.
std::vector<MetricRow> explanation_metrics(const MmsVae& model, const data::DatasetSplit& ds,
                                           const std::vector<int>& cutoffs);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows);

}  // namespace mmsvae::eval
