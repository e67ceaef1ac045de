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
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mmsvae/model/config.hpp"
#include "mmsvae/model/mmsvae.hpp"

namespace mmsvae {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Binary parameter file:
//   8-byte magic "MMSVAECK", u32 format version, u32 header length,
//   UTF-8 JSON header {kind, params: [{name, rows, cols}], meta},
//   then each parameter as little-endian float64 in row-major order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ParamFile {
    std::string kind;
    nlohmann::json meta;
    ParamStore params;
};

void write_param_file(const std::filesystem::path& path, const std::string& kind,
                      const nlohmann::json& meta, const ParamStore& params);
// Throws CheckpointError on bad magic, version, kind or truncation.
ParamFile read_param_file(const std::filesystem::path& path, const std::string& expected_kind);

struct LoadedModel {
    MmsVae model;
    TrainConfig config;
};

void save_checkpoint(const std::filesystem::path& path, const MmsVae& model, const TrainConfig& cfg);
LoadedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace mmsvae
