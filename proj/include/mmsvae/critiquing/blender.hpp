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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mmsvae/numerics/gru.hpp"
#include "mmsvae/numerics/param_store.hpp"

namespace mmsvae::critiquing {

enum class BlendKind { Gru, Uac, Bac };

const char* to_string(BlendKind kind);
BlendKind blend_kind_from(const std::string& name);

// Learned blending function: one GRU cell, shared across steps, run over
// (z0, z1, ..., zt) from a zero initial state. The final hidden state is
// the blended user latent.
class Blender {
public:
    explicit Blender(int dim);
    static Blender initialized(int dim, std::uint64_t seed);

    int dim() const { return dim_; }
    const ParamStore& params() const { return params_; }
    ParamStore& params() { return params_; }
    GruWeights<real> weights() const { return gru_view(params_, "gru"); }

    Vector blend(const Vector& z0, const std::vector<Vector>& critiques) const;
    // One recurrence step from state h with input x.
    Vector step(const Vector& h, const Vector& x) const;

private:
    int dim_;
    ParamStore params_;
};

// Mean of z0 and every critique latent.
Vector uac_blend(const Vector& z0, const std::vector<Vector>& critiques);
// Mean of the critique latents, then averaged with z0.
Vector bac_blend(const Vector& z0, const std::vector<Vector>& critiques);

// Two-sided hinge ranking loss between scores before and after a critique:
//   sum_{i in affected}   max(0, h - (before_i - after_i))
// + sum_{i in unaffected} max(0, h - (after_i - before_i))
// grad_after, when given, receives d loss / d after.
double blender_ranking_loss(const Vector& before, const Vector& after, std::span<const int> affected,
                            std::span<const int> unaffected, double margin, Vector* grad_after = nullptr);

// The `limit` ids with the highest score (ties by id), skipping excluded ids.
std::vector<int> cap_by_score(const Vector& scores, const std::vector<int>& ids, std::size_t limit,
                              const std::vector<char>* excluded = nullptr);

struct BlenderConfig {
    double margin = 0.75;  // h
    double lr = 1e-3;
    double l2 = 0.0;
    int epochs = 20;
    int batch_size = 64;
    int constraint_cap = 100;
    int falling_map_topn = 10;
    double holdout_fraction = 0.1;
    int patience = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

// Keys: h, LR, lambda_L2, epochs, batch_size, constraint_cap,
// falling_map_topn, holdout_fraction, patience, seed.
BlenderConfig blender_config_from(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> to_key_values(const BlenderConfig& cfg);

void save_blender(const std::filesystem::path& path, const Blender& blender, const BlenderConfig& cfg,
                  const std::string& model_hash);

struct LoadedBlender {
    Blender blender;
    BlenderConfig config;
    std::string model_hash;
};

LoadedBlender load_blender(const std::filesystem::path& path);

}  // namespace mmsvae::critiquing
