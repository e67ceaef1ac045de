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

#include "mmsvae/model/objective.hpp"

namespace mmsvae {

namespace {

using RowVector = Eigen::Matrix<real, 1, Eigen::Dynamic>;

struct ExpertGrads {
    Matrix mu;
    Matrix sigma;
};

class ObjectiveEvaluator {
public:
    ObjectiveEvaluator(const MmsVae& model, const Batch& batch, const TrainConfig& cfg, double beta,
                       RngStream& rng, bool with_grads)
        : model_(model), batch_(batch), cfg_(cfg), beta_(beta), rng_(rng), with_grads_(with_grads),
          scale_(real(1) / static_cast<real>(batch.size())) {
        if (with_grads_) grads_ = model.params().zeros_like();
    }

    ObjectiveResult run() {
        const Eigen::Index n = batch_.size();
        const bool ablation = cfg_.mode == TrainMode::ROnlyAblation;
        RowVector w_joint = RowVector::Zero(n), w_r = RowVector::Zero(n), w_k = RowVector::Zero(n);
        for (Eigen::Index b = 0; b < n; ++b) {
            const auto obs = batch_.obs[static_cast<std::size_t>(b)];
            w_r(b) = obs != Observation::KOnly ? 1 : 0;
            if (!ablation) {
                w_k(b) = obs != Observation::ROnly ? 1 : 0;
                w_joint(b) = obs == Observation::Both ? 1 : 0;
            }
        }
        const bool any_joint = w_joint.sum() > 0;
        const bool need_r = any_joint || w_r.sum() > 0;
        const bool need_k = any_joint || w_k.sum() > 0;

        ObjectiveResult result;
        EncodeCache cache_r, cache_k;
        Gaussian post_r, post_k;
        ExpertGrads g_r, g_k;
        if (need_r) {
            post_r = model_.encode(Modality::Interactions, batch_.r, true, cfg_.dropout, &rng_, &cache_r);
            g_r = {Matrix::Zero(post_r.dim(), n), Matrix::Zero(post_r.dim(), n)};
        }
        if (need_k) {
            post_k = model_.encode(Modality::Keyphrases, batch_.k, true, cfg_.dropout, &rng_, &cache_k);
            g_k = {Matrix::Zero(post_k.dim(), n), Matrix::Zero(post_k.dim(), n)};
        }

        if (any_joint) {
            const Gaussian joint = moe_combine(post_r, post_k, 0.5);
            ExpertGrads g_joint{Matrix::Zero(joint.dim(), n), Matrix::Zero(joint.dim(), n)};
            result.terms.joint = term(joint, w_joint, true, true, g_joint);
            g_r.mu += 0.5 * g_joint.mu;
            g_k.mu += 0.5 * g_joint.mu;
            g_r.sigma += 0.5 * g_joint.sigma;
            g_k.sigma += 0.5 * g_joint.sigma;
        }
        if (w_r.sum() > 0) result.terms.r = term(post_r, w_r, true, false, g_r);
        if (w_k.sum() > 0) result.terms.k = term(post_k, w_k, false, true, g_k);

        if (with_grads_) {
            if (need_r) encoder_backward(Modality::Interactions, post_r, cache_r, g_r);
            if (need_k) encoder_backward(Modality::Keyphrases, post_k, cache_k, g_k);
        }

        double l2 = 0.0;
        if (cfg_.l2 > 0) {
            const auto& params = model_.params();
            for (std::size_t i = 0; i < params.size(); ++i) {
                if (!is_weight(params.name(i))) continue;
                l2 += params.at(i).squaredNorm();
                if (with_grads_) grads_.at(i) += (2.0 * cfg_.l2) * params.at(i);
            }
            l2 *= cfg_.l2;
        }
        result.terms.l2 = l2;
        result.loss = -(result.terms.joint + result.terms.r + result.terms.k) + l2;
        if (with_grads_) result.grads = std::move(grads_);
        return result;
    }

private:
    static bool is_weight(const std::string& name) { return name.ends_with(".w1") || name.ends_with(".w2"); }

    // Evaluates one ELBO term; returns the weighted batch mean and
    // accumulates d(loss)/d(mu, sigma) into g.
    double term(const Gaussian& post, const RowVector& w, bool use_r, bool use_k, ExpertGrads& g) {
        const Eigen::Index n = batch_.size();
        const Matrix eps = rng_.standard_normal(post.dim(), n);
        const Matrix z = reparameterize(post, eps);
        const real lambda = static_cast<real>(cfg_.lambda);
        const real beta = static_cast<real>(beta_);

        RowVector loglik = RowVector::Zero(n);
        Matrix dz = Matrix::Zero(post.dim(), n);
        // d(loss)/d(loglik_b) = -lambda * w_b / B
        const RowVector dll = (-lambda * scale_) * w;
        auto reconstruct = [&](Modality m, const Matrix& target) {
            Mlp2Cache<real> cache;
            const Matrix logits = model_.decode(m, z, with_grads_ ? &cache : nullptr);
            loglik += multinomial_loglik_columns(logits, target);
            if (!with_grads_) return;
            const Matrix dlogits = multinomial_loglik_grad(logits, target) * dll.asDiagonal();
            auto pg = mlp2_grads(grads_, MmsVae::decoder_prefix(m));
            dz += mlp2_backward(model_.decoder(m), cache, dlogits, &pg);
        };
        if (use_r) reconstruct(Modality::Interactions, batch_.r);
        if (use_k) reconstruct(Modality::Keyphrases, batch_.k);

        const RowVector kl = kl_std_normal_columns(post);
        const RowVector elbo = lambda * loglik - beta * kl;

        if (with_grads_) {
            const Gaussian dkl = kl_std_normal_grad(post);
            const RowVector dkl_w = (beta * scale_) * w;
            g.mu += dz + dkl.mu * dkl_w.asDiagonal();
            g.sigma += dz.cwiseProduct(eps) + dkl.sigma * dkl_w.asDiagonal();
        }
        return scale_ * elbo.cwiseProduct(w).sum();
    }

    void encoder_backward(Modality m, const Gaussian& post, const EncodeCache& cache, const ExpertGrads& g) {
        const Eigen::Index h = post.dim();
        Matrix dout(2 * h, post.batch());
        dout.topRows(h) = g.mu;
        // sigma = exp(log sigma)
        dout.bottomRows(h) = g.sigma.cwiseProduct(post.sigma);
        auto pg = mlp2_grads(grads_, MmsVae::encoder_prefix(m));
        mlp2_backward(model_.encoder(m), cache.mlp, dout, &pg, false);
    }

    const MmsVae& model_;
    const Batch& batch_;
    const TrainConfig& cfg_;
    double beta_;
    RngStream& rng_;
    bool with_grads_;
    real scale_;
    ParamStore grads_;
};

}  // namespace

Batch make_batch(const data::DatasetSplit& ds, const std::vector<int>& users, const data::ObservationMask* mask) {
    Batch b;
    b.r = data::rows_as_columns(ds.train, users);
    b.k = data::rows_as_columns(ds.keyphrases.user, users);
    b.obs.reserve(users.size());
    for (int u : users) b.obs.push_back(mask ? (*mask)[static_cast<std::size_t>(u)] : Observation::Both);
    return b;
}

ObjectiveResult training_objective(const MmsVae& model, const Batch& batch, const TrainConfig& cfg,
                                   double beta, RngStream& rng, bool with_grads) {
    if (batch.size() == 0) throw ShapeError("training_objective: empty batch");
    require_shape(batch.r.cols() == batch.size() && batch.k.cols() == batch.size(),
                  "training_objective: batch columns disagree with observation flags");
    return ObjectiveEvaluator(model, batch, cfg, beta, rng, with_grads).run();
}

}  // namespace mmsvae
