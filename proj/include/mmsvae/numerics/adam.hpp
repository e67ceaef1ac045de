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

#include <atomic>
#include <cmath>
#include <cstdint>

#include "mmsvae/numerics/param_store.hpp"

namespace mmsvae {

struct AdamConfig {
    double lr = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename Scalar>
struct BasicOptimizerState {
    BasicParamStore<Scalar> m;
    BasicParamStore<Scalar> v;
    BasicParamStore<Scalar> v_max;
    std::uint64_t step = 0;

    static BasicOptimizerState fresh(const BasicParamStore<Scalar>& params) {
        return {params.zeros_like(), params.zeros_like(), params.zeros_like(), 0};
    }
};

using OptimizerState = BasicOptimizerState<real>;

// Process-wide count of optimizer steps taken. Serving paths assert that
// this does not move.
inline std::atomic<std::uint64_t>& optimizer_step_counter() {
    static std::atomic<std::uint64_t> counter{0};
    return counter;
}

// Adam with the AMSGrad running maximum of the second moment.
template <typename Scalar>
void adam_amsgrad_step(BasicParamStore<Scalar>& params, const BasicParamStore<Scalar>& grads,
                       BasicOptimizerState<Scalar>& state, const AdamConfig& cfg) {
    if (!(cfg.lr > 0.0)) throw ConfigError("learning rate must be positive");
    require_shape(params.same_layout(grads), "adam: gradient layout mismatch");
    if (state.m.size() == 0) state = BasicOptimizerState<Scalar>::fresh(params);
    require_shape(params.same_layout(state.m), "adam: optimizer state layout mismatch");

    ++state.step;
    optimizer_step_counter().fetch_add(1, std::memory_order_relaxed);
    const double t = static_cast<double>(state.step);
    const Scalar bc1 = Scalar(1.0 - std::pow(cfg.beta1, t));
    const Scalar bc2_sqrt = Scalar(std::sqrt(1.0 - std::pow(cfg.beta2, t)));
    const Scalar b1 = Scalar(cfg.beta1), b2 = Scalar(cfg.beta2);
    const Scalar step_size = Scalar(cfg.lr) / bc1;

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto g = grads.at(i).array();
        auto m = state.m.at(i).array();
        auto v = state.v.at(i).array();
        auto vmax = state.v_max.at(i).array();
        m = b1 * m + (Scalar(1) - b1) * g;
        v = b2 * v + (Scalar(1) - b2) * g.square();
        vmax = vmax.max(v);
        auto denom = vmax.sqrt() / bc2_sqrt + Scalar(cfg.eps);
        params.at(i).array() -= step_size * m / denom;
    }
}

}  // namespace mmsvae
