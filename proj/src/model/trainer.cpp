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

#include "mmsvae/model/trainer.hpp"

#include <numeric>

#include "mmsvae/eval/metrics.hpp"
#include "mmsvae/numerics/adam.hpp"

namespace mmsvae {

ModelShape shape_for(const data::DatasetSplit& ds, const TrainConfig& cfg) {
    return {ds.num_items(), ds.num_keyphrases(), cfg.latent, cfg.hidden_width()};
}

double heldout_ndcg(const MmsVae& model, const data::DatasetSplit& ds, const data::SparseMatrix& heldout, int n,
                    InputSource source) {
    std::vector<int> users;
    for (int u = 0; u < heldout.outerSize(); ++u)
        if (heldout.innerVector(u).nonZeros() > 0) users.push_back(u);
    if (users.empty()) return 0.0;

    constexpr std::size_t kChunk = 256;
    double total = 0.0;
    for (std::size_t start = 0; start < users.size(); start += kChunk) {
        const std::vector<int> chunk(users.begin() + static_cast<long>(start),
                                     users.begin() + static_cast<long>(std::min(users.size(), start + kChunk)));
        const Matrix r = data::rows_as_columns(ds.train, chunk);
        const Matrix k = data::rows_as_columns(ds.keyphrases.user, chunk);
        Matrix mu;
        switch (source) {
            case InputSource::Interactions: mu = model.encode_r(r).mu; break;
            case InputSource::Keyphrases: mu = model.encode_k(k).mu; break;
            case InputSource::Joint: mu = model.encode_joint(r, k, Observation::Both).mu; break;
        }
        const Matrix scores = model.decode_r(mu);
        for (std::size_t j = 0; j < chunk.size(); ++j) {
            const int u = chunk[j];
            const auto mask = exclusion_mask(ds.num_items(), data::row_indices(ds.train, u));
            const RankedList ranked = top_n(scores.col(static_cast<Eigen::Index>(j)), n, &mask);
            total += eval::ndcg_at(ranked.ids, data::row_indices(heldout, u), n);
        }
    }
    return total / static_cast<double>(users.size());
}

TrainResult train_model(const data::DatasetSplit& ds, const TrainConfig& cfg, const data::ObservationMask* mask,
                        const std::function<void(const EpochLog&)>& on_epoch) {
    cfg.validate();
    MmsVae model = MmsVae::initialized(shape_for(ds, cfg), cfg.seed);

    data::ObservationMask own_mask;
    if (!mask) {
        own_mask = data::mask_modalities(ds.num_users(), cfg.fully_observed, cfg.seed ^ 0x6d61736bULL);
        mask = &own_mask;
    }
    require_shape(static_cast<int>(mask->size()) == ds.num_users(), "train_model: mask size differs from |U|");

    // Users with nothing observed contribute only a KL term; leave them out.
    std::vector<int> users;
    for (int u = 0; u < ds.num_users(); ++u) {
        const auto obs = (*mask)[static_cast<std::size_t>(u)];
        const bool has_r = ds.train.innerVector(u).nonZeros() > 0 && obs != Observation::KOnly;
        const bool has_k = ds.keyphrases.user.innerVector(u).nonZeros() > 0 && obs != Observation::ROnly;
        if (has_r || has_k) users.push_back(u);
    }
    if (users.empty()) throw ConfigError("train_model: no user has an observed modality");

    const AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};
    OptimizerState state = OptimizerState::fresh(model.params());
    RngStream rng(cfg.seed, 0);

    TrainResult result{model, 0, 0.0, 0.0, {}};
    result.initial_validation_ndcg = heldout_ndcg(model, ds, ds.validation, cfg.validation_topn);
    result.best_validation_ndcg = result.initial_validation_ndcg;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(users);
        const double beta = beta_schedule(epoch, cfg);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < users.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::vector<int> chunk(
                users.begin() + static_cast<long>(start),
                users.begin() + static_cast<long>(std::min(users.size(), start + static_cast<std::size_t>(cfg.batch_size))));
            Batch batch = make_batch(ds, chunk, mask);
            ObjectiveResult obj = training_objective(model, batch, cfg, beta, rng);
            if (!std::isfinite(obj.loss)) throw NumericDomainError("training diverged: non-finite loss");
            adam_amsgrad_step(model.params(), obj.grads, state, adam);
            loss_sum += obj.loss;
            ++batches;
        }
        EpochLog log{epoch + 1, beta, loss_sum / static_cast<double>(batches), 0.0, false};
        if ((epoch + 1) % cfg.eval_every == 0 || epoch + 1 == cfg.epochs) {
            log.validation_ndcg = heldout_ndcg(model, ds, ds.validation, cfg.validation_topn);
            log.evaluated = true;
            if (log.validation_ndcg > result.best_validation_ndcg) {
                result.best_validation_ndcg = log.validation_ndcg;
                result.best_epoch = epoch + 1;
                result.model = model;
            }
        }
        result.history.push_back(log);
        if (on_epoch) on_epoch(log);
    }
    return result;
}

}  // namespace mmsvae
