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

#include "mmsvae/critiquing/blender.hpp"

#include <algorithm>
#include <sstream>

#include "mmsvae/model/checkpoint.hpp"
#include "mmsvae/numerics/layers.hpp"

namespace mmsvae::critiquing {

const char* to_string(BlendKind kind) {
    switch (kind) {
        case BlendKind::Gru: return "gru";
        case BlendKind::Uac: return "uac";
        case BlendKind::Bac: return "bac";
    }
    return "?";
}

BlendKind blend_kind_from(const std::string& name) {
    if (name == "gru") return BlendKind::Gru;
    if (name == "uac") return BlendKind::Uac;
    if (name == "bac") return BlendKind::Bac;
    throw ConfigError("unknown blender `" + name + "` (expected gru, uac or bac)");
}

Blender::Blender(int dim) : dim_(dim) {
    if (dim <= 0) throw ConfigError("blender dimension must be positive");
    add_gru_params<real>(params_, "gru", dim);
}

Blender Blender::initialized(int dim, std::uint64_t seed) {
    Blender b(dim);
    RngStream rng(seed);
    for (std::size_t i = 0; i < b.params_.size(); ++i)
        if (b.params_.at(i).cols() > 1) init_uniform_fan_in(b.params_.at(i), rng);
    return b;
}

Vector Blender::blend(const Vector& z0, const std::vector<Vector>& critiques) const {
    std::vector<Matrix> inputs;
    inputs.reserve(critiques.size() + 1);
    inputs.emplace_back(z0);
    for (const auto& z : critiques) inputs.emplace_back(z);
    return gru_sequence_forward<real>(inputs, Matrix::Zero(dim_, 1), weights()).col(0);
}

Vector Blender::step(const Vector& h, const Vector& x) const {
    return gru_cell_forward<real>(x, h, weights()).col(0);
}

Vector uac_blend(const Vector& z0, const std::vector<Vector>& critiques) {
    Vector sum = z0;
    for (const auto& z : critiques) {
        require_shape(z.size() == z0.size(), "uac_blend: dimension mismatch");
        sum += z;
    }
    return sum / static_cast<real>(critiques.size() + 1);
}

Vector bac_blend(const Vector& z0, const std::vector<Vector>& critiques) {
    if (critiques.empty()) return z0;
    Vector sum = Vector::Zero(z0.size());
    for (const auto& z : critiques) {
        require_shape(z.size() == z0.size(), "bac_blend: dimension mismatch");
        sum += z;
    }
    return (z0 + sum / static_cast<real>(critiques.size())) / real(2);
}

double blender_ranking_loss(const Vector& before, const Vector& after, std::span<const int> affected,
                            std::span<const int> unaffected, double margin, Vector* grad_after) {
    require_shape(before.size() == after.size(), "blender_ranking_loss: score vectors differ in length");
    if (!(margin > 0)) throw ConfigError("margin must be positive");
    if (grad_after) *grad_after = Vector::Zero(after.size());
    double loss = 0.0;
    for (int i : affected) {
        const double slack = margin - (before(i) - after(i));
        if (slack > 0) {
            loss += slack;
            if (grad_after) (*grad_after)(i) += 1;
        }
    }
    for (int i : unaffected) {
        const double slack = margin - (after(i) - before(i));
        if (slack > 0) {
            loss += slack;
            if (grad_after) (*grad_after)(i) -= 1;
        }
    }
    return loss;
}

std::vector<int> cap_by_score(const Vector& scores, const std::vector<int>& ids, std::size_t limit,
                              const std::vector<char>* excluded) {
    std::vector<int> pool;
    for (int id : ids)
        if (!excluded || !(*excluded)[static_cast<std::size_t>(id)]) pool.push_back(id);
    const std::size_t take = std::min(limit, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<long>(take), pool.end(), [&](int a, int b) {
        if (scores(a) != scores(b)) return scores(a) > scores(b);
        return a < b;
    });
    pool.resize(take);
    return pool;
}

void BlenderConfig::validate() const {
    if (!(margin > 0)) throw ConfigError("h must be positive");
    if (!(lr > 0)) throw ConfigError("LR must be positive");
    if (!(l2 >= 0)) throw ConfigError("lambda_L2 must be non-negative");
    if (epochs < 0 || batch_size <= 0 || constraint_cap <= 0 || falling_map_topn <= 0 || patience <= 0)
        throw ConfigError("blender counts must be positive");
    if (!(holdout_fraction >= 0 && holdout_fraction < 1)) throw ConfigError("holdout_fraction must lie in [0, 1)");
}

BlenderConfig blender_config_from(const std::map<std::string, std::string>& kv) {
    BlenderConfig c;
    auto num = [](const std::string& k, const std::string& v) {
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw ConfigError("blender config key `" + k + "`: `" + v + "` is not a number");
        }
    };
    for (const auto& [k, v] : kv) {
        if (k == "h") c.margin = num(k, v);
        else if (k == "LR") c.lr = num(k, v);
        else if (k == "lambda_L2") c.l2 = num(k, v);
        else if (k == "epochs") c.epochs = static_cast<int>(num(k, v));
        else if (k == "batch_size") c.batch_size = static_cast<int>(num(k, v));
        else if (k == "constraint_cap") c.constraint_cap = static_cast<int>(num(k, v));
        else if (k == "falling_map_topn") c.falling_map_topn = static_cast<int>(num(k, v));
        else if (k == "holdout_fraction") c.holdout_fraction = num(k, v);
        else if (k == "patience") c.patience = static_cast<int>(num(k, v));
        else if (k == "seed") c.seed = std::stoull(v);
        else throw ConfigError("unknown blender config key `" + k + "`");
    }
    c.validate();
    return c;
}

std::map<std::string, std::string> to_key_values(const BlenderConfig& c) {
    auto fmt = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    return {{"h", fmt(c.margin)},
            {"LR", fmt(c.lr)},
            {"lambda_L2", fmt(c.l2)},
            {"epochs", std::to_string(c.epochs)},
            {"batch_size", std::to_string(c.batch_size)},
            {"constraint_cap", std::to_string(c.constraint_cap)},
            {"falling_map_topn", std::to_string(c.falling_map_topn)},
            {"holdout_fraction", fmt(c.holdout_fraction)},
            {"patience", std::to_string(c.patience)},
            {"seed", std::to_string(c.seed)}};
}

void save_blender(const std::filesystem::path& path, const Blender& blender, const BlenderConfig& cfg,
                  const std::string& model_hash) {
    nlohmann::json meta;
    meta["dim"] = blender.dim();
    meta["config"] = to_key_values(cfg);
    meta["model_sha256"] = model_hash;
    write_param_file(path, "mmsvae-blender", meta, blender.params());
}

LoadedBlender load_blender(const std::filesystem::path& path) {
    ParamFile file = read_param_file(path, "mmsvae-blender");
    try {
        Blender b(file.meta.at("dim").get<int>());
        if (!b.params().same_layout(file.params))
            throw CheckpointError(path.string() + ": blender parameter shapes do not match its dimension");
        b.params() = std::move(file.params);
        return {std::move(b),
                blender_config_from(file.meta.at("config").get<std::map<std::string, std::string>>()),
                file.meta.value("model_sha256", "")};
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(path.string() + ": malformed blender metadata: " + e.what());
    }
}

}  // namespace mmsvae::critiquing
