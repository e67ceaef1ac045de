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

#include "mmsvae/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace mmsvae::eval {

namespace {

std::unordered_set<int> as_set(std::span<const int> ids) { return {ids.begin(), ids.end()}; }

std::size_t depth(std::span<const int> ranked, int n) {
    return std::min(ranked.size(), static_cast<std::size_t>(std::max(n, 0)));
}

}  // namespace

double ndcg_at(std::span<const int> ranked, std::span<const int> relevant, int n) {
    const auto rel = as_set(relevant);
    if (rel.empty() || n <= 0) return 0.0;
    double dcg = 0.0;
    const std::size_t d = depth(ranked, n);
    for (std::size_t p = 0; p < d; ++p)
        if (rel.count(ranked[p])) dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    const std::size_t ideal_hits = std::min(rel.size(), static_cast<std::size_t>(n));
    double idcg = 0.0;
    for (std::size_t p = 0; p < ideal_hits; ++p) idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    return dcg / idcg;
}

double precision_at(std::span<const int> ranked, std::span<const int> relevant, int n) {
    if (n <= 0) return 0.0;
    const auto rel = as_set(relevant);
    const std::size_t d = depth(ranked, n);
    std::size_t hits = 0;
    for (std::size_t p = 0; p < d; ++p) hits += rel.count(ranked[p]);
    return static_cast<double>(hits) / static_cast<double>(n);
}

double recall_at(std::span<const int> ranked, std::span<const int> relevant, int n) {
    const auto rel = as_set(relevant);
    if (rel.empty()) return 0.0;
    const std::size_t d = depth(ranked, n);
    std::size_t hits = 0;
    for (std::size_t p = 0; p < d; ++p) hits += rel.count(ranked[p]);
    return static_cast<double>(hits) / static_cast<double>(rel.size());
}

double map_at(std::span<const int> ranked, std::span<const int> relevant, int n) {
    const auto rel = as_set(relevant);
    if (rel.empty() || n <= 0) return 0.0;
    const std::size_t d = depth(ranked, n);
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
        if (!rel.count(ranked[p])) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(p + 1);
    }
    return sum / static_cast<double>(std::min(rel.size(), static_cast<std::size_t>(n)));
}

double r_precision(std::span<const int> ranked, std::span<const int> relevant) {
    const auto rel = as_set(relevant);
    if (rel.empty()) return 0.0;
    const std::size_t d = std::min(ranked.size(), rel.size());
    std::size_t hits = 0;
    for (std::size_t p = 0; p < d; ++p) hits += rel.count(ranked[p]);
    return static_cast<double>(hits) / static_cast<double>(rel.size());
}

double falling_map(std::span<const int> ranked_before, std::span<const int> ranked_after,
                   std::span<const int> affected, int n) {
    return map_at(ranked_before, affected, n) - map_at(ranked_after, affected, n);
}

Estimate mean_ci95(std::span<const double> values) {
    Estimate e;
    e.count = values.size();
    if (values.empty()) return e;
    double sum = 0.0;
    for (double v : values) sum += v;
    e.mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    if (values.size() > 1) {
        for (double v : values) var += (v - e.mean) * (v - e.mean);
        var /= static_cast<double>(values.size() - 1);
    }
    const double half = 1.959963984540054 * std::sqrt(var / static_cast<double>(values.size()));
    e.ci_low = e.mean - half;
    e.ci_high = e.mean + half;
    return e;
}

}  // namespace mmsvae::eval
