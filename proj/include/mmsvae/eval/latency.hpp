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
#include <vector>

#include "mmsvae/critiquing/session.hpp"
#include "mmsvae/data/dataset.hpp"
#include "mmsvae/eval/metrics.hpp"

namespace mmsvae::eval {

struct LatencyConfig {
    int users = 1000;  // cycles through the dataset's users when larger
    int turns = 10;
    int runs = 10;
    int top_n = 10;
    critiquing::BlendKind blend = critiquing::BlendKind::Gru;
    std::uint64_t seed = 0;
};

struct LatencyReport {
    Estimate per_critique_ms;  // over runs
    Estimate total_minutes;    // over runs: encode + every critique for all users
    std::vector<double> per_turn_ms;  // mean latency of the t-th critique, t = 1..turns
    std::size_t critiques = 0;        // per run
    std::uint64_t optimizer_steps = 0;
};

// Simulates `users` single-user sessions of `turns` random critiques each,
// one critique at a time (batch size one), and times every critique.
LatencyReport measure_latency(const MmsVae& model, const critiquing::Blender* blender, const data::DatasetSplit& ds,
                              const LatencyConfig& cfg);

void write_latency_csv(const std::filesystem::path& path, const LatencyReport& report, const LatencyConfig& cfg);

}  // namespace mmsvae::eval
