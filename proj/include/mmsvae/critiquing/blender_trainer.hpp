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

#include <functional>
#include <vector>

#include "mmsvae/critiquing/blender.hpp"
#include "mmsvae/critiquing/synthetic_dataset.hpp"
#include "mmsvae/model/mmsvae.hpp"

namespace mmsvae::critiquing {

// Quantities of the frozen model shared by every tuple: each user's mean
// latent and item scores before any critique, and each keyphrase's
// critique embedding.
struct CritiqueContext {
    Matrix user_latents;      // H x |U|
    Matrix user_scores;       // |I| x |U|
    Matrix critique_latents;  // H x |K|

    static CritiqueContext build(const MmsVae& model, const data::DatasetSplit& ds);
};

// mu of encode_k on the one-hot vector of keyphrase c.
Vector embed_critique(const MmsVae& model, int c);

// A tuple with its constraint sets capped to the highest-scored items
// before the critique (train-observed items excluded).
struct PreparedTuple {
    int user = 0;
    int item = 0;
    int critique = 0;
    std::vector<int> affected;        // capped I+c
    std::vector<int> unaffected;      // capped I-c
    std::vector<int> affected_all;    // I+c minus train-observed items
};

std::vector<PreparedTuple> prepare_tuples(const std::vector<SyntheticCritiqueTuple>& tuples,
                                          const CritiqueContext& ctx, const data::DatasetSplit& ds,
                                          std::size_t cap);

struct BlenderObjective {
    double loss = 0.0;  // mean per-tuple ranking loss + L2
    ParamStore grads;
};

// Ranking loss of a batch of tuples through the frozen decoder. Gradients
// flow into the blender only.
BlenderObjective blender_objective(const MmsVae& model, const CritiqueContext& ctx, const Blender& blender,
                                   std::span<const PreparedTuple> batch, const BlenderConfig& cfg,
                                   bool with_grads = true);

struct CritiqueEvaluation {
    double mean_falling_map = 0.0;
    // Fraction of tuples whose capped affected items have a worse mean rank
    // after the critique.
    double fraction_affected_dropped = 0.0;
    std::size_t count = 0;
};

CritiqueEvaluation evaluate_critiquing(const MmsVae& model, const CritiqueContext& ctx, const data::DatasetSplit& ds,
                                       std::span<const PreparedTuple> tuples, BlendKind kind,
                                       const Blender* blender, int falling_map_topn);

struct BlenderEpochLog {
    int epoch = 0;
    double loss = 0.0;
    double holdout_falling_map = 0.0;
};

struct BlenderTrainResult {
    Blender blender;
    int best_epoch = 0;
    double best_falling_map = 0.0;
    double initial_falling_map = 0.0;
    std::vector<BlenderEpochLog> history;
};

// Minimizes the ranking loss over blender parameters with Adam/AMSGrad.
// A holdout share of the tuples selects the epoch by Falling MAP. The model
// is never written; a change to its parameters raises std::logic_error.
BlenderTrainResult train_blender(const MmsVae& model, const data::DatasetSplit& ds,
                                 const std::vector<SyntheticCritiqueTuple>& tuples, const BlenderConfig& cfg,
                                 const std::function<void(const BlenderEpochLog&)>& on_epoch = {});

std::string params_digest(const ParamStore& params);

}  // namespace mmsvae::critiquing
