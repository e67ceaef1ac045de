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

#include <span>
#include <vector>

#include "mmsvae/numerics/types.hpp"

namespace mmsvae::eval {

// All ranking metrics take the ranked ids (best first) and the relevant ids
// (any order). The ranking is read up to position n (or its length).
// An empty relevant set has no defined value; callers skip such users.

// Binary gains, log2 discount, normalized by the ideal DCG over
// min(|relevant|, n) positions.
double ndcg_at(std::span<const int> ranked, std::span<const int> relevant, int n);
double precision_at(std::span<const int> ranked, std::span<const int> relevant, int n);
double recall_at(std::span<const int> ranked, std::span<const int> relevant, int n);
// Mean of precision at each relevant hit within the first n, divided by
// min(|relevant|, n).
double map_at(std::span<const int> ranked, std::span<const int> relevant, int n);
// Precision at rank |relevant|.
double r_precision(std::span<const int> ranked, std::span<const int> relevant);

// MAP@n of `affected` under the ranking before the critique minus the same
// under the ranking after it. Positive when affected items fell.
double falling_map(std::span<const int> ranked_before, std::span<const int> ranked_after,
                   std::span<const int> affected, int n);

// Mean with a normal-approximation 95% interval.
struct Estimate {
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t count = 0;
};

Estimate mean_ci95(std::span<const double> values);

}  // namespace mmsvae::eval
