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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "mmsvae/numerics/param_store.hpp"

namespace mmsvae {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    Eigen::Index worst_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

struct GradCheckOptions {
    double eps = 1e-5;
    // Entries where both gradients are below this are compared absolutely.
    double abs_floor = 1e-7;
    // Check at most this many entries per parameter (0 = all), spread evenly.
    Eigen::Index max_per_param = 0;
};

// Central differences of `loss` around `params` compared against `analytic`.
// `loss` must be deterministic (fix its RNG) and may not keep references to
// the store between calls.
template <typename Scalar>
GradCheckReport grad_check(const std::function<Scalar(const BasicParamStore<Scalar>&)>& loss,
                           BasicParamStore<Scalar> params, const BasicParamStore<Scalar>& analytic,
                           const GradCheckOptions& opts = {}) {
    require_shape(params.same_layout(analytic), "grad_check: gradient layout mismatch");
    GradCheckReport report;
    if (!std::isfinite(static_cast<double>(loss(params))))
        throw NumericDomainError("grad_check: loss is not finite at the base point");
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& value = params.at(p);
        const Eigen::Index n = value.size();
        const Eigen::Index stride =
            (opts.max_per_param > 0 && n > opts.max_per_param) ? n / opts.max_per_param : 1;
        for (Eigen::Index k = 0; k < n; k += stride) {
            const Scalar saved = value.data()[k];
            value.data()[k] = saved + Scalar(opts.eps);
            const double up = static_cast<double>(loss(params));
            value.data()[k] = saved - Scalar(opts.eps);
            const double down = static_cast<double>(loss(params));
            value.data()[k] = saved;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw NumericDomainError("grad_check: loss is not finite near " + params.name(p));
            const double numeric = (up - down) / (2.0 * opts.eps);
            const double a = static_cast<double>(analytic.at(p).data()[k]);
            const double scale = std::max({std::abs(a), std::abs(numeric), opts.abs_floor});
            const double rel = std::abs(a - numeric) / scale;
            ++report.checked;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = params.name(p);
                report.worst_index = k;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace mmsvae
