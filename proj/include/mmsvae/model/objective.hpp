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

#include <vector>

#include "mmsvae/model/config.hpp"
#include "mmsvae/model/mmsvae.hpp"

namespace mmsvae {

// One minibatch: dense interaction and keyphrase columns per user plus the
// user's observation flag.
struct Batch {
    Matrix r;
    Matrix k;
    std::vector<Observation> obs;

    Eigen::Index size() const { return static_cast<Eigen::Index>(obs.size()); }
};

Batch make_batch(const data::DatasetSplit& ds, const std::vector<int>& users,
                 const data::ObservationMask* mask = nullptr);

// Batch means of each ELBO term (users not contributing to a term count as 0).
struct ElboBreakdown {
    double joint = 0.0;
    double r = 0.0;
    double k = 0.0;
    double l2 = 0.0;
};

struct ObjectiveResult {
    double loss = 0.0;
    ParamStore grads;
    ElboBreakdown terms;
};

// Negative weakly-supervised ELBO averaged over the batch:
//   users with both modalities: ELBO(r,k) + ELBO(r) + ELBO(k)
//   r-only users: ELBO(r);  k-only users: ELBO(k)
// where each ELBO = lambda * reconstruction log-likelihood - beta * KL with
// one reparameterized sample, plus lambda_L2 * sum of squared weights. In
// r-only ablation mode only ELBO(r) is used, i.e. the plain VAE-CF bound.
//
// The RNG is consumed in a fixed order: dropout(r), dropout(k), noise for
// the joint, r and k terms. Terms that are not evaluated draw nothing.
ObjectiveResult training_objective(const MmsVae& model, const Batch& batch, const TrainConfig& cfg,
                                   double beta, RngStream& rng, bool with_grads = true);

inline ObjectiveResult training_objective(const MmsVae& model, const Batch& batch, const TrainConfig& cfg,
                                          int epoch, RngStream& rng, bool with_grads = true) {
    return training_objective(model, batch, cfg, beta_schedule(epoch, cfg), rng, with_grads);
}

}  // namespace mmsvae
