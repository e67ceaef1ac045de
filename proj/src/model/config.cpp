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

#include "mmsvae/model/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mmsvae/numerics/types.hpp"

namespace mmsvae {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double as_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key `" + key + "`: `" + v + "` is not a number");
    }
}

int as_int(const std::string& key, const std::string& v) {
    const double d = as_double(key, v);
    if (d != static_cast<double>(static_cast<long>(d)))
        throw ConfigError("config key `" + key + "`: `" + v + "` is not an integer");
    return static_cast<int>(d);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected `key = value`");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

void TrainConfig::validate() const {
    if (latent <= 0) throw ConfigError("H must be positive");
    if (hidden < 0) throw ConfigError("hidden must be non-negative");
    if (!(lr > 0)) throw ConfigError("LR must be positive");
    if (!(lambda > 0)) throw ConfigError("lambda must be positive");
    if (!(beta >= 0)) throw ConfigError("beta must be non-negative");
    if (!(anneal_fraction > 0 && anneal_fraction <= 1)) throw ConfigError("anneal_fraction must lie in (0, 1]");
    if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must lie in [0, 1)");
    if (!(l2 >= 0)) throw ConfigError("lambda_L2 must be non-negative");
    if (epochs < 0 || batch_size <= 0 || validation_topn <= 0 || eval_every <= 0)
        throw ConfigError("epochs, batch_size, validation_topn and eval_every must be positive");
    if (!(fully_observed >= 0 && fully_observed <= 1)) throw ConfigError("fully_observed must lie in [0, 1]");
}

TrainConfig train_config_from(const std::map<std::string, std::string>& kv) {
    TrainConfig c;
    for (const auto& [k, v] : kv) {
        if (k == "H") c.latent = as_int(k, v);
        else if (k == "hidden") c.hidden = as_int(k, v);
        else if (k == "LR") c.lr = as_double(k, v);
        else if (k == "lambda_L2") c.l2 = as_double(k, v);
        else if (k == "lambda") c.lambda = as_double(k, v);
        else if (k == "beta") c.beta = as_double(k, v);
        else if (k == "anneal_fraction") c.anneal_fraction = as_double(k, v);
        else if (k == "dropout") c.dropout = as_double(k, v);
        else if (k == "epochs") c.epochs = as_int(k, v);
        else if (k == "batch_size") c.batch_size = as_int(k, v);
        else if (k == "validation_topn") c.validation_topn = as_int(k, v);
        else if (k == "eval_every") c.eval_every = as_int(k, v);
        else if (k == "fully_observed") c.fully_observed = as_double(k, v);
        else if (k == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(v));
        else if (k == "mode") {
            if (v == "full") c.mode = TrainMode::Full;
            else if (v == "r-only") c.mode = TrainMode::ROnlyAblation;
            else throw ConfigError("mode must be `full` or `r-only`");
        } else {
            throw ConfigError("unknown training config key `" + k + "`");
        }
    }
    c.validate();
    return c;
}

std::map<std::string, std::string> to_key_values(const TrainConfig& c) {
    return {{"H", std::to_string(c.latent)},
            {"hidden", std::to_string(c.hidden)},
            {"LR", fmt(c.lr)},
            {"lambda_L2", fmt(c.l2)},
            {"lambda", fmt(c.lambda)},
            {"beta", fmt(c.beta)},
            {"anneal_fraction", fmt(c.anneal_fraction)},
            {"dropout", fmt(c.dropout)},
            {"epochs", std::to_string(c.epochs)},
            {"batch_size", std::to_string(c.batch_size)},
            {"validation_topn", std::to_string(c.validation_topn)},
            {"eval_every", std::to_string(c.eval_every)},
            {"fully_observed", fmt(c.fully_observed)},
            {"seed", std::to_string(c.seed)},
            {"mode", c.mode == TrainMode::Full ? "full" : "r-only"}};
}

std::string to_text(const std::map<std::string, std::string>& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

const char* to_string(TrainMode mode) { return mode == TrainMode::Full ? "full" : "r-only"; }

double beta_schedule(int epoch, const TrainConfig& cfg) {
    if (epoch <= 0) return 0.0;
    const double ramp = cfg.anneal_fraction * static_cast<double>(cfg.epochs);
    if (ramp <= 0.0) return cfg.beta;
    return cfg.beta * std::min(1.0, static_cast<double>(epoch) / ramp);
}

}  // namespace mmsvae
