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

#include "mmsvae/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace mmsvae {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'M', 'S', 'V', 'A', 'E', 'C', 'K'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void write_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

}  // namespace

void write_param_file(const fs::path& path, const std::string& kind, const json& meta, const ParamStore& params) {
    json header;
    header["kind"] = kind;
    header["meta"] = meta;
    header["params"] = json::array();
    for (std::size_t i = 0; i < params.size(); ++i)
        header["params"].push_back({{"name", params.name(i)}, {"rows", params.at(i).rows()}, {"cols", params.at(i).cols()}});
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + path.string());
    out.write(kMagic, sizeof kMagic);
    write_u32(out, kCheckpointVersion);
    write_u32(out, static_cast<std::uint32_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = params.at(i);
        out.write(reinterpret_cast<const char*>(row_major.data()),
                  static_cast<std::streamsize>(row_major.size() * sizeof(real)));
    }
    if (!out) throw CheckpointError("failed writing " + path.string());
}

ParamFile read_param_file(const fs::path& path, const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open " + path.string());
    char magic[8] = {};
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw CheckpointError(path.string() + ": not an mmsvae checkpoint (bad magic)");
    const std::uint32_t version = read_u32(in);
    if (!in || version != kCheckpointVersion)
        throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(version) +
                              " (expected " + std::to_string(kCheckpointVersion) + ")");
    const std::uint32_t header_len = read_u32(in);
    std::string text(header_len, '\0');
    in.read(text.data(), header_len);
    if (!in) throw CheckpointError(path.string() + ": truncated header");
    json header;
    try {
        header = json::parse(text);
    } catch (const json::exception& e) {
        throw CheckpointError(path.string() + ": corrupt header: " + e.what());
    }
    ParamFile file;
    file.kind = header.value("kind", "");
    if (file.kind != expected_kind)
        throw CheckpointError(path.string() + ": expected a `" + expected_kind + "` checkpoint, found `" +
                              file.kind + "`");
    file.meta = header.value("meta", json::object());
    for (const auto& p : header.at("params")) {
        const Eigen::Index rows = p.at("rows"), cols = p.at("cols");
        Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(rows, cols);
        in.read(reinterpret_cast<char*>(row_major.data()), static_cast<std::streamsize>(row_major.size() * sizeof(real)));
        if (!in) throw CheckpointError(path.string() + ": truncated parameter " + p.at("name").get<std::string>());
        file.params.add(p.at("name").get<std::string>(), Matrix(row_major));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError(path.string() + ": trailing bytes");
    return file;
}

void save_checkpoint(const fs::path& path, const MmsVae& model, const TrainConfig& cfg) {
    const auto& s = model.shape();
    json meta;
    meta["shape"] = {{"num_items", s.num_items}, {"num_keyphrases", s.num_keyphrases}, {"latent", s.latent}, {"hidden", s.hidden}};
    meta["config"] = to_key_values(cfg);
    meta["seed"] = cfg.seed;
    write_param_file(path, "mmsvae-model", meta, model.params());
}

LoadedModel load_checkpoint(const fs::path& path) {
    ParamFile file = read_param_file(path, "mmsvae-model");
    try {
        const auto& s = file.meta.at("shape");
        ModelShape shape{s.at("num_items"), s.at("num_keyphrases"), s.at("latent"), s.at("hidden")};
        TrainConfig cfg = train_config_from(file.meta.at("config").get<std::map<std::string, std::string>>());
        MmsVae model(shape);
        if (!model.params().same_layout(file.params))
            throw CheckpointError(path.string() + ": parameter shapes do not match the recorded model shape");
        model.params() = std::move(file.params);
        return {std::move(model), cfg};
    } catch (const json::exception& e) {
        throw CheckpointError(path.string() + ": malformed metadata: " + e.what());
    }
}

}  // namespace mmsvae
