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

#include "mmsvae/critiquing/blender.hpp"
#include "mmsvae/data/dataset.hpp"
#include "mmsvae/data/io.hpp"
#include "mmsvae/model/config.hpp"

namespace mmsvae::testing {

inline std::filesystem::path source_dir() { return MMSVAE_SOURCE_DIR; }

inline data::RatingsTable fixture_table() {
    const auto dir = source_dir() / "data" / "fixture";
    auto table = data::read_ratings_csv(dir / "ratings.csv");
    table.vocabulary = data::read_vocabulary(dir / "vocab.txt");
    data::read_reviews_csv(dir / "reviews.csv", table);
    return table;
}

inline data::DatasetSplit fixture_split() { return data::build_dataset(fixture_table(), 3.5, {}, 0); }

inline TrainConfig fixture_train_config() {
    return train_config_from(read_key_values(source_dir() / "configs" / "fixture.conf"));
}

inline critiquing::BlenderConfig fixture_blender_config() {
    return critiquing::blender_config_from(read_key_values(source_dir() / "configs" / "fixture_blender.conf"));
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mmsvae_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace mmsvae::testing
