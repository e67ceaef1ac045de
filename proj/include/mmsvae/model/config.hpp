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
#include <map>
#include <string>

namespace mmsvae {

// Parses `key = value` lines; `#` starts a comment. Keys are case-sensitive.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

enum class TrainMode { Full, ROnlyAblation };

struct TrainConfig {
    int latent = 300;         // H
    int hidden = 0;           // width of the tanh layer; 0 means "same as latent"
    double lr = 5e-5;         // LR
    double l2 = 1e-10;        // lambda_L2
    double lambda = 3.0;      // reconstruction weight
    double beta = 0.7;        // KL cap reached at the end of annealing
    double anneal_fraction = 0.5;
    double dropout = 0.4;
    int epochs = 300;
    int batch_size = 128;
    int validation_topn = 20;
    int eval_every = 1;
    double fully_observed = 1.0;  // fraction of users with both modalities
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::Full;

    int hidden_width() const { return hidden > 0 ? hidden : latent; }
    void validate() const;
};

// Accepted keys mirror the hyperparameter table names: H, hidden, LR,
// lambda_L2, lambda, beta, anneal_fraction, dropout, epochs, batch_size,
// validation_topn, eval_every, fully_observed, seed, mode (full|r-only).
TrainConfig train_config_from(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> to_key_values(const TrainConfig& cfg);
std::string to_text(const std::map<std::string, std::string>& kv);

const char* to_string(TrainMode mode);

// Linear ramp 0 -> beta over anneal_fraction * epochs, then constant.
double beta_schedule(int epoch, const TrainConfig& cfg);

}  // namespace mmsvae
