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
#include <string>
#include <vector>

#include "mmsvae/critiquing/session.hpp"
#include "mmsvae/data/dataset.hpp"
#include "mmsvae/eval/metrics.hpp"
#include "mmsvae/numerics/rng.hpp"

namespace mmsvae::eval {

enum class CandidateMode { Sampled, AllItems };
enum class Selector { Random, Pop, Diff };

const char* to_string(CandidateMode mode);
const char* to_string(Selector selector);
CandidateMode candidate_mode_from(const std::string& name);
Selector selector_from(const std::string& name);

struct SimulationConfig {
    std::vector<int> top_n{5, 10, 20};
    int max_turns = 10;
    CandidateMode mode = CandidateMode::Sampled;
    int sampled_unseen = 299;
    Selector selector = Selector::Random;
    critiquing::BlendKind blend = critiquing::BlendKind::Gru;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;
};

// Picks the keyphrase to critique among `candidates` (keyphrases absent
// from the target's K^I row). Returns -1 when there is none.
//   Random: uniform.
//   Pop: proportional to corpus popularity; uniform if every weight is 0.
//   Diff: argmax of (count in the top items' K^I rows - count in the
//         target's row), ties by id.
int select_critique(Selector selector, int target, const std::vector<int>& candidates,
                    const std::vector<int>& top_items, const data::SparseMatrix& item_keyphrases,
                    const std::vector<double>& popularity, RngStream& rng);

struct SimulationRecord {
    int user = 0;
    int target = 0;
    int top_n = 0;
    bool success = false;
    int turns = 0;  // critiques applied; 0 when the target was already listed
    bool aborted = false;
};

struct SimulationSummary {
    int top_n = 0;
    Estimate success_rate;    // over per-user means
    Estimate session_length;  // successful sessions only, over per-user means
    std::size_t pairs = 0;
    std::size_t successes = 0;
    std::size_t aborted = 0;
};

struct SimulationResult {
    std::vector<SimulationRecord> records;
    std::vector<SimulationSummary> summaries;  // one per top_n, in config order
};

// One conversation per (user, test positive, N). Each conversation draws
// from a stream derived from (seed, user, target), so results do not depend
// on the thread count.
SimulationResult simulate(const MmsVae& model, const critiquing::Blender* blender, const data::DatasetSplit& ds,
                          const SimulationConfig& cfg);

// Long format: selector,blend,mode,top_n,metric,mean,ci_low,ci_high,count
void write_simulation_csv(const std::filesystem::path& path, const SimulationResult& result,
                          const SimulationConfig& cfg);
void write_simulation_records(const std::filesystem::path& path, const SimulationResult& result);

}  // namespace mmsvae::eval
