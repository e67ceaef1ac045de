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

#include "mmsvae/model/config.hpp"
#include "mmsvae/model/mmsvae.hpp"
#include "mmsvae/model/objective.hpp"

namespace mmsvae {

struct EpochLog {
    int epoch = 0;
    double beta = 0.0;
    double loss = 0.0;
    double validation_ndcg = 0.0;
    bool evaluated = false;
};

struct TrainResult {
    MmsVae model;  // parameters of the best validation epoch
    int best_epoch = 0;
    double best_validation_ndcg = 0.0;
    double initial_validation_ndcg = 0.0;
    std::vector<EpochLog> history;
};

enum class InputSource { Interactions, Keyphrases, Joint };

// Mean NDCG@n over users with at least one held-out positive. Users are
// encoded (mean, no dropout) from the train-side rows of `source`, and
// train-observed items are excluded from the ranking.
double heldout_ndcg(const MmsVae& model, const data::DatasetSplit& ds, const data::SparseMatrix& heldout,
                    int n, InputSource source = InputSource::Interactions);

// Trains from `cfg.seed`. Observation flags come from mask_modalities with
// cfg.fully_observed unless an explicit mask is given. The returned model is
// the best epoch by validation NDCG (epoch 0 = untrained).
TrainResult train_model(const data::DatasetSplit& ds, const TrainConfig& cfg,
                        const data::ObservationMask* mask = nullptr,
                        const std::function<void(const EpochLog&)>& on_epoch = {});

ModelShape shape_for(const data::DatasetSplit& ds, const TrainConfig& cfg);

}  // namespace mmsvae
