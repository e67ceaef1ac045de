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

#include "mmsvae/data/dataset.hpp"

namespace mmsvae::data {

// Synthetic low-rank corpus: users and items get Gaussian factors, users
// rate their highest-affinity items highly, and each item carries the
// keyphrases whose directions align best with its factor. A review
// mentions each of the item's keyphrases with a probability that grows with
// the reviewer's alignment to that keyphrase direction.
struct FixtureConfig {
    int num_users = 200;
    int num_items = 100;
    int num_keyphrases = 12;
    int rank = 4;
    int keyphrases_per_item = 3;
    int min_positives = 12;
    int max_positives = 24;
    int negatives_per_user = 5;
    double affinity_noise = 0.3;
    double mention_probability = 0.7;
    double mention_sharpness = 4.0;  // taste dependence of mentions
    std::uint64_t seed = 7;
};

RatingsTable generate_fixture(const FixtureConfig& cfg);

}  // namespace mmsvae::data
