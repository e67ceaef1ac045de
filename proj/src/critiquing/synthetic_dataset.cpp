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

#include "mmsvae/critiquing/synthetic_dataset.hpp"

#include <fstream>

#include "mmsvae/util/hash.hpp"

namespace mmsvae::critiquing {

std::pair<std::vector<int>, std::vector<int>> partition_items(const data::SparseMatrix& item_keyphrases, int c) {
    if (c < 0 || c >= item_keyphrases.cols()) throw ShapeError("keyphrase id out of range");
    std::vector<int> with, without;
    for (int i = 0; i < item_keyphrases.outerSize(); ++i) {
        bool has = false;
        for (data::SparseMatrix::InnerIterator it(item_keyphrases, i); it; ++it)
            if (it.col() == c && it.value() != 0) has = true;
        (has ? with : without).push_back(i);
    }
    return {std::move(with), std::move(without)};
}

std::vector<SyntheticCritiqueTuple> generate_synthetic_dataset(const data::SparseMatrix& heldout,
                                                               const data::SparseMatrix& item_keyphrases,
                                                               RngStream& rng, std::vector<std::string>* warnings) {
    require_shape(heldout.cols() == item_keyphrases.rows(),
                  "generate_synthetic_dataset: item axes of the interaction and keyphrase matrices differ");
    const int n_kp = static_cast<int>(item_keyphrases.cols());
    std::vector<std::pair<std::vector<int>, std::vector<int>>> partitions;
    partitions.reserve(static_cast<std::size_t>(n_kp));
    for (int c = 0; c < n_kp; ++c) partitions.push_back(partition_items(item_keyphrases, c));

    std::vector<SyntheticCritiqueTuple> out;
    for (int u = 0; u < heldout.outerSize(); ++u) {
        for (int i : data::row_indices(heldout, u)) {
            std::vector<char> has(static_cast<std::size_t>(n_kp), 0);
            for (int k : data::row_indices(item_keyphrases, i)) has[static_cast<std::size_t>(k)] = 1;
            std::vector<int> candidates;
            for (int k = 0; k < n_kp; ++k)
                if (!has[static_cast<std::size_t>(k)]) candidates.push_back(k);
            if (candidates.empty()) {
                if (warnings)
                    warnings->push_back("item " + std::to_string(i) + " carries every keyphrase; tuple for user " +
                                        std::to_string(u) + " skipped");
                continue;
            }
            const int c = candidates[static_cast<std::size_t>(rng.uniform_index(candidates.size()))];
            const auto& [with, without] = partitions[static_cast<std::size_t>(c)];
            out.push_back({u, i, c, with, without});
        }
    }
    return out;
}

std::string id_set_hash(const std::vector<int>& ids) {
    std::string bytes;
    for (int id : ids) bytes += std::to_string(id) + ",";
    return sha256_hex(bytes).substr(0, 16);
}

void write_synthetic_dump(const std::filesystem::path& path, const std::vector<SyntheticCritiqueTuple>& tuples) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "user,item,critique,affected,unaffected,affected_hash,unaffected_hash\n";
    for (const auto& t : tuples)
        out << t.user << ',' << t.item << ',' << t.critique << ',' << t.affected.size() << ','
            << t.unaffected.size() << ',' << id_set_hash(t.affected) << ',' << id_set_hash(t.unaffected) << '\n';
}

}  // namespace mmsvae::critiquing
