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

#include <filesystem>
#include <string>
#include <vector>

#include "mmsvae/data/dataset.hpp"
#include "mmsvae/numerics/rng.hpp"

namespace mmsvae::critiquing {

// (u, i, c, I+c, I-c): a held-out positive i of user u, a keyphrase c that i
// does not carry, the items carrying c and the items that do not.
struct SyntheticCritiqueTuple {
    int user = 0;
    int item = 0;
    int critique = 0;
    std::vector<int> affected;    // I+c, ascending
    std::vector<int> unaffected;  // I-c, ascending

    bool operator==(const SyntheticCritiqueTuple&) const = default;
};

// One tuple per positive of `heldout`, users ascending then items ascending.
// The critique is drawn uniformly from the keyphrases absent from the
// item's row of `item_keyphrases`; items carrying every keyphrase are skipped
// and reported through `warnings`.
std::vector<SyntheticCritiqueTuple> generate_synthetic_dataset(const data::SparseMatrix& heldout,
                                                               const data::SparseMatrix& item_keyphrases,
                                                               RngStream& rng,
                                                               std::vector<std::string>* warnings = nullptr);

// Items carrying / not carrying keyphrase c.
std::pair<std::vector<int>, std::vector<int>> partition_items(const data::SparseMatrix& item_keyphrases, int c);

// One line per tuple: user,item,critique,|I+|,|I-|,hash(I+),hash(I-)
void write_synthetic_dump(const std::filesystem::path& path, const std::vector<SyntheticCritiqueTuple>& tuples);

std::string id_set_hash(const std::vector<int>& ids);

}  // namespace mmsvae::critiquing
