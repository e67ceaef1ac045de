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

#include "mmsvae/eval/latency.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>

#include "mmsvae/numerics/adam.hpp"

namespace mmsvae::eval {

LatencyReport measure_latency(const MmsVae& model, const critiquing::Blender* blender, const data::DatasetSplit& ds,
                              const LatencyConfig& cfg) {
    if (cfg.users < 1 || cfg.turns < 1 || cfg.runs < 1) throw ConfigError("latency: users, turns and runs must be >= 1");
    if (ds.num_users() == 0) throw ConfigError("latency: dataset has no users");
    using clock = std::chrono::steady_clock;
    const std::uint64_t steps_before = optimizer_step_counter().load();

    const critiquing::CritiqueEngine engine(model, blender, {cfg.top_n, cfg.turns, cfg.blend, 0});
    LatencyReport report;
    report.per_turn_ms.assign(static_cast<std::size_t>(cfg.turns), 0.0);
    std::vector<double> per_critique, totals;
    for (int run = 0; run < cfg.runs; ++run) {
        RngStream rng = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(run));
        double critique_ms = 0.0;
        const auto run_start = clock::now();
        for (int n = 0; n < cfg.users; ++n) {
            const int u = n % ds.num_users();
            const Matrix r = data::rows_as_columns(ds.train, {u});
            const Vector z0 = model.encode_r(r).mu.col(0);
            critiquing::CritiqueSession s = engine.start(z0, data::row_indices(ds.train, u), {}, u);
            for (int t = 0; t < cfg.turns; ++t) {
                const int c = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(ds.num_keyphrases())));
                const auto t0 = clock::now();
                engine.apply_critique(s, c);
                const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
                critique_ms += ms;
                report.per_turn_ms[static_cast<std::size_t>(t)] += ms;
            }
        }
        const double total_min = std::chrono::duration<double>(clock::now() - run_start).count() / 60.0;
        per_critique.push_back(critique_ms / (static_cast<double>(cfg.users) * cfg.turns));
        totals.push_back(total_min);
    }
    for (double& ms : report.per_turn_ms) ms /= static_cast<double>(cfg.users) * cfg.runs;
    report.per_critique_ms = mean_ci95(per_critique);
    report.total_minutes = mean_ci95(totals);
    report.critiques = static_cast<std::size_t>(cfg.users) * static_cast<std::size_t>(cfg.turns);
    report.optimizer_steps = optimizer_step_counter().load() - steps_before;
    return report;
}

void write_latency_csv(const std::filesystem::path& path, const LatencyReport& report, const LatencyConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(10) << "blend,metric,turn,mean,ci_low,ci_high,count\n";
    const std::string blend = critiquing::to_string(cfg.blend);
    out << blend << ",per_critique_ms,0," << report.per_critique_ms.mean << ',' << report.per_critique_ms.ci_low << ','
        << report.per_critique_ms.ci_high << ',' << report.per_critique_ms.count << '\n';
    out << blend << ",total_minutes,0," << report.total_minutes.mean << ',' << report.total_minutes.ci_low << ','
        << report.total_minutes.ci_high << ',' << report.total_minutes.count << '\n';
    for (std::size_t t = 0; t < report.per_turn_ms.size(); ++t)
        out << blend << ",turn_ms," << t + 1 << ',' << report.per_turn_ms[t] << ",,," << cfg.runs << '\n';
    out << blend << ",optimizer_steps,0," << report.optimizer_steps << ",,,1\n";
}

}  // namespace mmsvae::eval
