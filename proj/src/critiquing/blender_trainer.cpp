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

#include "mmsvae/critiquing/blender_trainer.hpp"

#include <stdexcept>

#include "mmsvae/eval/metrics.hpp"
#include "mmsvae/numerics/adam.hpp"
#include "mmsvae/util/hash.hpp"

namespace mmsvae::critiquing {

Vector embed_critique(const MmsVae& model, int c) {
    if (c < 0 || c >= model.shape().num_keyphrases) throw std::out_of_range("keyphrase id out of range");
    Matrix one_hot = Matrix::Zero(model.shape().num_keyphrases, 1);
    one_hot(c, 0) = 1;
    return model.encode_k(one_hot).mu.col(0);
}

CritiqueContext CritiqueContext::build(const MmsVae& model, const data::DatasetSplit& ds) {
    CritiqueContext ctx;
    std::vector<int> users(static_cast<std::size_t>(ds.num_users()));
    for (int u = 0; u < ds.num_users(); ++u) users[static_cast<std::size_t>(u)] = u;
    ctx.user_latents = user_latent_means(model, ds.train, users);
    ctx.user_scores = model.decode_r(ctx.user_latents);
    ctx.critique_latents.resize(model.shape().latent, model.shape().num_keyphrases);
    for (int c = 0; c < model.shape().num_keyphrases; ++c) ctx.critique_latents.col(c) = embed_critique(model, c);
    return ctx;
}

std::vector<PreparedTuple> prepare_tuples(const std::vector<SyntheticCritiqueTuple>& tuples,
                                          const CritiqueContext& ctx, const data::DatasetSplit& ds, std::size_t cap) {
    std::vector<PreparedTuple> out;
    out.reserve(tuples.size());
    for (const auto& t : tuples) {
        const auto mask = exclusion_mask(ds.num_items(), data::row_indices(ds.train, t.user));
        const Vector before = ctx.user_scores.col(t.user);
        PreparedTuple p;
        p.user = t.user;
        p.item = t.item;
        p.critique = t.critique;
        p.affected = cap_by_score(before, t.affected, cap, &mask);
        p.unaffected = cap_by_score(before, t.unaffected, cap, &mask);
        for (int i : t.affected)
            if (!mask[static_cast<std::size_t>(i)]) p.affected_all.push_back(i);
        out.push_back(std::move(p));
    }
    return out;
}

BlenderObjective blender_objective(const MmsVae& model, const CritiqueContext& ctx, const Blender& blender,
                                   std::span<const PreparedTuple> batch, const BlenderConfig& cfg, bool with_grads) {
    if (batch.empty()) throw ShapeError("blender_objective: empty batch");
    const auto n = static_cast<Eigen::Index>(batch.size());
    const Eigen::Index h = blender.dim();
    Matrix z0(h, n), zc(h, n);
    for (Eigen::Index b = 0; b < n; ++b) {
        const auto& t = batch[static_cast<std::size_t>(b)];
        z0.col(b) = ctx.user_latents.col(t.user);
        zc.col(b) = ctx.critique_latents.col(t.critique);
    }
    const auto weights = blender.weights();
    std::vector<GruStepCache<real>> gru_cache;
    const Matrix blended = gru_sequence_forward<real>({z0, zc}, Matrix::Zero(h, n), weights,
                                                      with_grads ? &gru_cache : nullptr);
    Mlp2Cache<real> dec_cache;
    const Matrix after = model.decode(Modality::Interactions, blended, with_grads ? &dec_cache : nullptr);

    BlenderObjective out;
    Matrix dafter = Matrix::Zero(after.rows(), n);
    const real scale = real(1) / static_cast<real>(n);
    for (Eigen::Index b = 0; b < n; ++b) {
        const auto& t = batch[static_cast<std::size_t>(b)];
        Vector g;
        out.loss += blender_ranking_loss(ctx.user_scores.col(t.user), after.col(b), t.affected, t.unaffected,
                                         cfg.margin, with_grads ? &g : nullptr);
        if (with_grads) dafter.col(b) = scale * g;
    }
    out.loss *= scale;

    if (with_grads) out.grads = blender.params().zeros_like();
    if (cfg.l2 > 0) {
        for (std::size_t i = 0; i < blender.params().size(); ++i) {
            const auto& p = blender.params().at(i);
            if (p.cols() == 1) continue;
            out.loss += cfg.l2 * p.squaredNorm();
            if (with_grads) out.grads.at(i) += (2.0 * cfg.l2) * p;
        }
    }
    if (with_grads) {
        // The decoder is frozen: propagate through it without collecting
        // parameter gradients.
        const Matrix dblended = mlp2_backward<real>(model.decoder(Modality::Interactions), dec_cache, dafter, nullptr);
        gru_sequence_backward<real>(weights, gru_cache, dblended, gru_grads(out.grads, "gru"));
    }
    return out;
}

namespace {

Vector blended_latent(const CritiqueContext& ctx, const PreparedTuple& t, BlendKind kind, const Blender* blender) {
    const Vector z0 = ctx.user_latents.col(t.user);
    const std::vector<Vector> critiques{ctx.critique_latents.col(t.critique)};
    switch (kind) {
        case BlendKind::Gru:
            if (!blender) throw ConfigError("GRU blending needs a trained blender");
            return blender->blend(z0, critiques);
        case BlendKind::Uac: return uac_blend(z0, critiques);
        case BlendKind::Bac: return bac_blend(z0, critiques);
    }
    return z0;
}

double mean_rank(const Vector& scores, const std::vector<int>& ids, const std::vector<char>& mask) {
    double sum = 0.0;
    for (int id : ids) sum += rank_position(scores, id, &mask);
    return ids.empty() ? 0.0 : sum / static_cast<double>(ids.size());
}

}  // namespace

CritiqueEvaluation evaluate_critiquing(const MmsVae& model, const CritiqueContext& ctx, const data::DatasetSplit& ds,
                                       std::span<const PreparedTuple> tuples, BlendKind kind, const Blender* blender,
                                       int falling_map_topn) {
    CritiqueEvaluation ev;
    double fmap = 0.0;
    std::size_t dropped = 0, ranked = 0;
    for (const auto& t : tuples) {
        if (t.affected_all.empty()) continue;
        const auto mask = exclusion_mask(ds.num_items(), data::row_indices(ds.train, t.user));
        const Vector before = ctx.user_scores.col(t.user);
        const Vector after = model.decode_r(blended_latent(ctx, t, kind, blender)).col(0);
        const RankedList rb = top_n(before, falling_map_topn, &mask);
        const RankedList ra = top_n(after, falling_map_topn, &mask);
        fmap += eval::falling_map(rb.ids, ra.ids, t.affected_all, falling_map_topn);
        if (!t.affected.empty()) {
            ++ranked;
            if (mean_rank(after, t.affected, mask) > mean_rank(before, t.affected, mask)) ++dropped;
        }
        ++ev.count;
    }
    if (ev.count > 0) ev.mean_falling_map = fmap / static_cast<double>(ev.count);
    if (ranked > 0) ev.fraction_affected_dropped = static_cast<double>(dropped) / static_cast<double>(ranked);
    return ev;
}

std::string params_digest(const ParamStore& params) {
    std::string bytes;
    for (std::size_t i = 0; i < params.size(); ++i) {
        bytes += params.name(i);
        bytes.append(reinterpret_cast<const char*>(params.at(i).data()),
                     static_cast<std::size_t>(params.at(i).size()) * sizeof(real));
    }
    return sha256_hex(bytes);
}

BlenderTrainResult train_blender(const MmsVae& model, const data::DatasetSplit& ds,
                                 const std::vector<SyntheticCritiqueTuple>& tuples, const BlenderConfig& cfg,
                                 const std::function<void(const BlenderEpochLog&)>& on_epoch) {
    cfg.validate();
    if (tuples.empty()) throw ConfigError("train_blender: synthetic dataset is empty");
    const std::string model_digest = params_digest(model.params());

    const CritiqueContext ctx = CritiqueContext::build(model, ds);
    std::vector<PreparedTuple> prepared = prepare_tuples(tuples, ctx, ds, static_cast<std::size_t>(cfg.constraint_cap));
    RngStream rng(cfg.seed, 0);
    rng.shuffle(prepared);
    auto n_holdout = static_cast<std::size_t>(std::lround(cfg.holdout_fraction * static_cast<double>(prepared.size())));
    if (n_holdout >= prepared.size()) n_holdout = 0;
    std::vector<PreparedTuple> holdout(prepared.end() - static_cast<long>(n_holdout), prepared.end());
    prepared.resize(prepared.size() - n_holdout);
    const auto& selection = holdout.empty() ? prepared : holdout;

    Blender blender = Blender::initialized(model.shape().latent, cfg.seed ^ 0x626c656eULL);
    BlenderTrainResult result{blender, 0, 0.0, 0.0, {}};
    result.initial_falling_map =
        evaluate_critiquing(model, ctx, ds, selection, BlendKind::Gru, &blender, cfg.falling_map_topn).mean_falling_map;
    result.best_falling_map = result.initial_falling_map;

    OptimizerState state = OptimizerState::fresh(blender.params());
    const AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};
    int since_best = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(prepared);
        double loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < prepared.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(prepared.size(), start + static_cast<std::size_t>(cfg.batch_size));
            BlenderObjective obj = blender_objective(
                model, ctx, blender, std::span<const PreparedTuple>(prepared.data() + start, end - start), cfg);
            adam_amsgrad_step(blender.params(), obj.grads, state, adam);
            loss += obj.loss;
            ++batches;
        }
        BlenderEpochLog log{epoch, batches ? loss / static_cast<double>(batches) : 0.0, 0.0};
        log.holdout_falling_map =
            evaluate_critiquing(model, ctx, ds, selection, BlendKind::Gru, &blender, cfg.falling_map_topn).mean_falling_map;
        result.history.push_back(log);
        if (on_epoch) on_epoch(log);
        if (log.holdout_falling_map > result.best_falling_map || result.best_epoch == 0) {
            result.best_falling_map = log.holdout_falling_map;
            result.best_epoch = epoch;
            result.blender = blender;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    if (params_digest(model.params()) != model_digest)
        throw std::logic_error("train_blender: frozen model parameters changed during blender training");
    return result;
}

}  // namespace mmsvae::critiquing
