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

#include "mmsvae/eval/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <map>
#include <thread>

namespace mmsvae::eval {

const char* to_string(CandidateMode mode) { return mode == CandidateMode::Sampled ? "sampled" : "all"; }

const char* to_string(Selector selector) {
    switch (selector) {
        case Selector::Random: return "random";
        case Selector::Pop: return "pop";
        case Selector::Diff: return "diff";
    }
    return "?";
}

CandidateMode candidate_mode_from(const std::string& name) {
    if (name == "sampled" || name == "sampled-300") return CandidateMode::Sampled;
    if (name == "all" || name == "all-items") return CandidateMode::AllItems;
    throw ConfigError("unknown candidate mode '" + name + "' (sampled | all)");
}

Selector selector_from(const std::string& name) {
    if (name == "random") return Selector::Random;
    if (name == "pop") return Selector::Pop;
    if (name == "diff") return Selector::Diff;
    throw ConfigError("unknown selector '" + name + "' (random | pop | diff)");
}

void SimulationConfig::validate() const {
    if (top_n.empty()) throw ConfigError("top_n list is empty");
    for (int n : top_n)
        if (n < 1) throw ConfigError("top_n values must be >= 1");
    if (max_turns < 1) throw ConfigError("max_turns must be >= 1");
    if (sampled_unseen < 0) throw ConfigError("sampled_unseen must be >= 0");
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

int select_critique(Selector selector, int target, const std::vector<int>& candidates,
                    const std::vector<int>& top_items, const data::SparseMatrix& item_keyphrases,
                    const std::vector<double>& popularity, RngStream& rng) {
    if (candidates.empty()) return -1;
    switch (selector) {
        case Selector::Random:
            return candidates[rng.uniform_index(candidates.size())];
        case Selector::Pop: {
            double total = 0.0;
            for (int c : candidates) total += popularity[static_cast<std::size_t>(c)];
            if (!(total > 0)) return candidates[rng.uniform_index(candidates.size())];
            double x = rng.uniform() * total;
            for (int c : candidates) {
                x -= popularity[static_cast<std::size_t>(c)];
                if (x < 0) return c;
            }
            return candidates.back();
        }
        case Selector::Diff: {
            std::map<int, double> score;
            for (int c : candidates) score[c] = 0.0;
            for (int i : top_items)
                for (data::SparseMatrix::InnerIterator it(item_keyphrases, i); it; ++it)
                    if (auto s = score.find(static_cast<int>(it.col())); s != score.end()) s->second += 1;
            for (data::SparseMatrix::InnerIterator it(item_keyphrases, target); it; ++it)
                if (auto s = score.find(static_cast<int>(it.col())); s != score.end()) s->second -= 1;
            int best = candidates.front();
            for (const auto& [c, v] : score)
                if (v > score[best] || (v == score[best] && c < best)) best = c;
            return best;
        }
    }
    return -1;
}

namespace {

struct Pair {
    int user;
    int target;
};

SimulationRecord run_conversation(const critiquing::CritiqueEngine& engine, const data::DatasetSplit& ds,
                                  const SimulationConfig& cfg, const Vector& z0, const Pair& pair, int n) {
    RngStream rng = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(pair.user),
                                      static_cast<std::uint64_t>(pair.target));
    SimulationRecord rec{pair.user, pair.target, n, false, 0, false};

    std::vector<int> candidates;
    std::vector<int> excluded;
    if (cfg.mode == CandidateMode::Sampled) {
        std::vector<char> seen(static_cast<std::size_t>(ds.num_items()), 0);
        for (const auto* m : {&ds.train, &ds.validation, &ds.test})
            for (int i : data::row_indices(*m, pair.user)) seen[static_cast<std::size_t>(i)] = 1;
        std::vector<int> unseen;
        for (int i = 0; i < ds.num_items(); ++i)
            if (!seen[static_cast<std::size_t>(i)]) unseen.push_back(i);
        rng.shuffle(unseen);
        if (unseen.size() > static_cast<std::size_t>(cfg.sampled_unseen))
            unseen.resize(static_cast<std::size_t>(cfg.sampled_unseen));
        candidates = std::move(unseen);
        candidates.push_back(pair.target);
        std::sort(candidates.begin(), candidates.end());
    } else {
        excluded = data::row_indices(ds.train, pair.user);
    }

    std::vector<int> target_kp = data::row_indices(ds.keyphrases.item, pair.target);
    std::vector<int> open;
    for (int k = 0; k < ds.num_keyphrases(); ++k)
        if (!std::binary_search(target_kp.begin(), target_kp.end(), k)) open.push_back(k);

    critiquing::CritiqueSession s = engine.start(z0, excluded, std::move(candidates), pair.user);
    for (;;) {
        const auto& ids = s.ranking.ids;
        if (std::find(ids.begin(), ids.end(), pair.target) != ids.end()) {
            rec.success = true;
            break;
        }
        if (s.turn() >= cfg.max_turns) break;
        const int c = select_critique(cfg.selector, pair.target, open, ids, ds.keyphrases.item,
                                      ds.keyphrase_popularity, rng);
        if (c < 0) {
            rec.aborted = true;
            break;
        }
        open.erase(std::find(open.begin(), open.end(), c));
        engine.apply_critique(s, c);
    }
    rec.turns = s.turn();
    return rec;
}

SimulationSummary summarize(const std::vector<SimulationRecord>& records, int n) {
    SimulationSummary sum;
    sum.top_n = n;
    std::map<int, std::pair<double, double>> success;  // user -> (successes, pairs)
    std::map<int, std::pair<double, double>> length;   // user -> (turns, successes)
    for (const auto& r : records) {
        if (r.top_n != n) continue;
        ++sum.pairs;
        auto& s = success[r.user];
        s.second += 1;
        if (r.aborted) ++sum.aborted;
        if (r.success) {
            ++sum.successes;
            s.first += 1;
            auto& l = length[r.user];
            l.first += r.turns;
            l.second += 1;
        }
    }
    std::vector<double> rates, lengths;
    for (const auto& [u, s] : success) rates.push_back(s.first / s.second);
    for (const auto& [u, l] : length) lengths.push_back(l.first / l.second);
    sum.success_rate = mean_ci95(rates);
    sum.session_length = mean_ci95(lengths);
    return sum;
}

}  // namespace

SimulationResult simulate(const MmsVae& model, const critiquing::Blender* blender, const data::DatasetSplit& ds,
                          const SimulationConfig& cfg) {
    cfg.validate();
    std::vector<Pair> pairs;
    for (int u = 0; u < ds.num_users(); ++u)
        for (int i : data::row_indices(ds.test, u)) pairs.push_back({u, i});

    std::vector<int> users(static_cast<std::size_t>(ds.num_users()));
    for (int u = 0; u < ds.num_users(); ++u) users[static_cast<std::size_t>(u)] = u;
    const Matrix z0 = user_latent_means(model, ds.train, users);

    std::vector<critiquing::CritiqueEngine> engines;
    for (int n : cfg.top_n) engines.emplace_back(model, blender, critiquing::SessionConfig{n, cfg.max_turns, cfg.blend, 0});

    const std::size_t jobs = pairs.size() * cfg.top_n.size();
    SimulationResult result;
    result.records.resize(jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs;) {
            const std::size_t p = j / cfg.top_n.size(), t = j % cfg.top_n.size();
            result.records[j] = run_conversation(engines[t], ds, cfg, z0.col(pairs[p].user), pairs[p], cfg.top_n[t]);
        }
    };
    if (cfg.threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < cfg.threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (int n : cfg.top_n) result.summaries.push_back(summarize(result.records, n));
    return result;
}

void write_simulation_csv(const std::filesystem::path& path, const SimulationResult& result,
                          const SimulationConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "selector,blend,mode,top_n,metric,mean,ci_low,ci_high,count\n" << std::setprecision(10);
    for (const auto& s : result.summaries) {
        const std::string prefix = std::string(to_string(cfg.selector)) + ',' + critiquing::to_string(cfg.blend) +
                                   ',' + to_string(cfg.mode) + ',' + std::to_string(s.top_n) + ',';
        out << prefix << "success_rate," << s.success_rate.mean << ',' << s.success_rate.ci_low << ','
            << s.success_rate.ci_high << ',' << s.success_rate.count << '\n';
        out << prefix << "session_length," << s.session_length.mean << ',' << s.session_length.ci_low << ','
            << s.session_length.ci_high << ',' << s.session_length.count << '\n';
    }
}

void write_simulation_records(const std::filesystem::path& path, const SimulationResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "user,target,top_n,success,turns,aborted\n";
    for (const auto& r : result.records)
        out << r.user << ',' << r.target << ',' << r.top_n << ',' << r.success << ',' << r.turns << ',' << r.aborted
            << '\n';
}

}  // namespace mmsvae::eval
