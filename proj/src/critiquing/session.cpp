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

#include "mmsvae/critiquing/session.hpp"

#include "mmsvae/critiquing/blender_trainer.hpp"

namespace mmsvae::critiquing {

CritiqueEngine::CritiqueEngine(const MmsVae& model, const Blender* blender, SessionConfig cfg)
    : model_(&model), blender_(blender), cfg_(cfg) {
    if (cfg_.max_turns < 1) throw ConfigError("max_turns must be >= 1");
    if (cfg_.top_n < 1) throw ConfigError("top_n must be >= 1");
    if (cfg_.blend == BlendKind::Gru) {
        if (!blender_) throw ConfigError("GRU blending needs a trained blender");
        require_shape(blender_->dim() == model.shape().latent, "blender dimension differs from the model latent");
    }
    critique_latents_.resize(model.shape().latent, model.shape().num_keyphrases);
    for (int c = 0; c < model.shape().num_keyphrases; ++c) critique_latents_.col(c) = embed_critique(model, c);
}

Vector CritiqueEngine::critique_latent(int keyphrase) const {
    if (keyphrase < 0 || keyphrase >= critique_latents_.cols())
        throw UnknownKeyphrase("unknown keyphrase id " + std::to_string(keyphrase));
    return critique_latents_.col(keyphrase);
}

CritiqueSession CritiqueEngine::start(const Vector& z0, const std::vector<int>& exclude_items,
                                      std::vector<int> candidates, int user) const {
    require_shape(z0.size() == model_->shape().latent, "start: z0 has the wrong dimension");
    CritiqueSession s;
    s.user = user;
    s.z0 = z0;
    s.candidates = std::move(candidates);
    s.excluded = exclusion_mask(model_->shape().num_items, exclude_items);
    reset(s);
    return s;
}

void CritiqueEngine::reset(CritiqueSession& s) const {
    s.critiques.clear();
    s.critique_latents.clear();
    s.blended = s.z0;
    s.latent_sum = s.z0;
    s.critique_sum = Vector::Zero(s.z0.size());
    if (cfg_.blend == BlendKind::Gru) s.gru_state = blender_->step(Vector::Zero(s.z0.size()), s.z0);
    s.closed = false;
    rerank(s);
}

void CritiqueEngine::apply_critique(CritiqueSession& s, int keyphrase) const {
    if (s.closed) throw TurnBudgetExhausted("session is closed");
    if (s.turn() >= cfg_.max_turns) {
        s.closed = true;
        throw TurnBudgetExhausted("turn budget of " + std::to_string(cfg_.max_turns) + " critiques exhausted");
    }
    const Vector z = critique_latent(keyphrase);
    s.critiques.push_back(keyphrase);
    s.critique_latents.push_back(z);
    s.latent_sum += z;
    s.critique_sum += z;
    const auto t = static_cast<real>(s.turn());
    switch (cfg_.blend) {
        case BlendKind::Gru:
            s.gru_state = blender_->step(s.gru_state, z);
            s.blended = s.gru_state;
            break;
        case BlendKind::Uac: s.blended = s.latent_sum / (t + 1); break;
        case BlendKind::Bac: s.blended = (s.z0 + s.critique_sum / t) / real(2); break;
    }
    rerank(s);
}

Vector CritiqueEngine::replay_latent(const Vector& z0, const std::vector<int>& critiques) const {
    if (critiques.empty()) return z0;
    std::vector<Vector> latents;
    for (int c : critiques) latents.push_back(critique_latent(c));
    switch (cfg_.blend) {
        case BlendKind::Gru: return blender_->blend(z0, latents);
        case BlendKind::Uac: return uac_blend(z0, latents);
        case BlendKind::Bac: return bac_blend(z0, latents);
    }
    return z0;
}

void CritiqueEngine::rerank(CritiqueSession& s) const {
    s.scores = model_->decode_r(s.blended).col(0);
    s.ranking = top_n(s.scores, cfg_.top_n, &s.excluded, s.candidates.empty() ? nullptr : &s.candidates);
}

}  // namespace mmsvae::critiquing
