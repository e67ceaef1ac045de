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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mmsvae/critiquing/blender_trainer.hpp"
#include "mmsvae/critiquing/session.hpp"
#include "mmsvae/data/io.hpp"
#include "mmsvae/eval/evaluate.hpp"
#include "mmsvae/eval/latency.hpp"
#include "mmsvae/eval/simulation.hpp"
#include "mmsvae/model/checkpoint.hpp"
#include "mmsvae/model/objective.hpp"
#include "mmsvae/numerics/adam.hpp"
#include "mmsvae/numerics/grad_check.hpp"
#include "mmsvae/service/service.hpp"
#include "mmsvae/util/hash.hpp"
#include "support.hpp"

using namespace mmsvae;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------
// Shared trained system on the shipped fixture.

struct System {
    data::DatasetSplit ds;
    TrainConfig cfg;
    std::optional<TrainResult> trained;
    double train_seconds = 0.0;
    std::optional<critiquing::BlenderTrainResult> blender;
    critiquing::BlenderConfig blender_cfg;
};

System& system_state() {
    static System s = [] {
        System s;
        s.ds = testing::fixture_split();
        s.cfg = testing::fixture_train_config();
        const auto t0 = Clock::now();
        s.trained = train_model(s.ds, s.cfg);
        s.train_seconds = seconds_since(t0);
        s.blender_cfg = testing::fixture_blender_config();
        return s;
    }();
    return s;
}

const critiquing::BlenderTrainResult& trained_blender() {
    auto& s = system_state();
    if (!s.blender) {
        RngStream rng(s.blender_cfg.seed ^ 0x616c6731ULL, 0);
        const auto tuples = critiquing::generate_synthetic_dataset(s.ds.validation, s.ds.keyphrases.item, rng);
        s.blender = critiquing::train_blender(s.trained->model, s.ds, tuples, s.blender_cfg);
    }
    return *s.blender;
}

double metric(const std::vector<eval::MetricRow>& rows, const std::string& name, int n) {
    for (const auto& r : rows)
        if (r.metric == name && r.n == n) return r.value.mean;
    return std::nan("");
}

// ---------------------------------------------------------------------------
// 1. Gradient fidelity

Batch random_batch(int users, int items, int kps, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::bernoulli_distribution coin(0.35);
    Batch b;
    b.r = Matrix::Zero(items, users);
    b.k = Matrix::Zero(kps, users);
    for (int u = 0; u < users; ++u) {
        for (int i = 0; i < items; ++i) b.r(i, u) = coin(gen) ? 1 : 0;
        for (int k = 0; k < kps; ++k) b.k(k, u) = coin(gen) ? 1 : 0;
        b.r((u * 3) % items, u) = 1;
        b.k(u % kps, u) = 1;
        b.obs.push_back(u % 4 == 3 ? Observation::ROnly : u % 4 == 2 ? Observation::KOnly : Observation::Both);
    }
    return b;
}

Outcome criterion_gradients() {
    const auto t0 = Clock::now();
    const ModelShape shape{20, 6, 4, 5};
    const MmsVae model = MmsVae::initialized(shape, 11);
    const Batch batch = random_batch(8, 20, 6, 5);
    TrainConfig cfg;
    cfg.latent = 4;
    cfg.hidden = 5;
    cfg.lambda = 2.0;
    cfg.l2 = 1e-3;
    cfg.dropout = 0.3;
    const double beta = 0.6;

    RngStream rng(99);
    const auto analytic = training_objective(model, batch, cfg, beta, rng).grads;
    const std::function<double(const ParamStore&)> loss = [&](const ParamStore& p) {
        MmsVae m = model;
        m.params() = p;
        RngStream r(99);
        return training_objective(m, batch, cfg, beta, r, false).loss;
    };
    const auto vae = grad_check(loss, model.params(), analytic, {1e-5, 1e-7, 0});

    // Blender ranking loss through the frozen decoder.
    critiquing::CritiqueContext ctx;
    RngStream g(7);
    ctx.user_latents = g.standard_normal(4, 8);
    ctx.user_scores = model.decode_r(ctx.user_latents);
    ctx.critique_latents = g.standard_normal(4, 6);
    std::vector<critiquing::PreparedTuple> tuples;
    for (int t = 0; t < 8; ++t) {
        critiquing::PreparedTuple p;
        p.user = t;
        p.critique = t % 6;
        for (int i = 0; i < 20; ++i) ((i + t) % 3 == 0 ? p.affected : p.unaffected).push_back(i);
        tuples.push_back(p);
    }
    critiquing::BlenderConfig bcfg;
    bcfg.margin = 0.75;
    bcfg.l2 = 1e-3;
    const auto blender = critiquing::Blender::initialized(4, 3);
    const auto banalytic = critiquing::blender_objective(model, ctx, blender, tuples, bcfg).grads;
    const std::function<double(const ParamStore&)> bloss = [&](const ParamStore& p) {
        critiquing::Blender b = blender;
        b.params() = p;
        return critiquing::blender_objective(model, ctx, b, tuples, bcfg, false).loss;
    };
    const auto blend = grad_check(bloss, blender.params(), banalytic, {1e-5, 1e-7, 0});

    const double secs = seconds_since(t0);
    const bool pass = vae.max_rel_error < 1e-4 && blend.max_rel_error < 1e-4 && secs < 10.0;
    return {pass, fmt("objective max rel err %.2e over %zu entries (worst %s), blender %.2e over %zu; %.2f s",
                      vae.max_rel_error, vae.checked, vae.worst_param.c_str(), blend.max_rel_error, blend.checked,
                      secs)};
}

// ---------------------------------------------------------------------------
// 2. KL against Monte Carlo

Outcome criterion_kl() {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> mu_d(-2.0, 2.0), sigma_d(0.3, 2.5);
    std::normal_distribution<double> normal(0.0, 1.0);
    constexpr int kDim = 2;
    constexpr int kSamples = 1000000;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Gaussian post{Matrix(kDim, 1), Matrix(kDim, 1)};
        for (int d = 0; d < kDim; ++d) {
            post.mu(d, 0) = mu_d(gen);
            post.sigma(d, 0) = sigma_d(gen);
        }
        // E_q[log q(z) - log p(z)]
        long double acc = 0.0L;
        for (int s = 0; s < kSamples; ++s) {
            double log_ratio = 0.0;
            for (int d = 0; d < kDim; ++d) {
                const double e = normal(gen);
                const double z = post.mu(d, 0) + post.sigma(d, 0) * e;
                log_ratio += -std::log(post.sigma(d, 0)) - 0.5 * e * e + 0.5 * z * z;
            }
            acc += log_ratio;
        }
        const double mc = static_cast<double>(acc / kSamples);
        const double closed = kl_std_normal(post);
        worst = std::max(worst, std::abs(closed - mc) / std::abs(mc));
    }
    return {worst <= 0.01, fmt("20 random 2-d posteriors, 1e6 samples each: max relative gap %.3f%%", 100 * worst)};
}

// ---------------------------------------------------------------------------
// 3. Mixture degeneracy and the VAE-CF bound

// Plain-loop negative ELBO of the single-modality interaction VAE,
// replaying the objective's random draws: the dropout mask column by
// column, then the reparameterization noise.
double vae_cf_oracle(const MmsVae& model, const Matrix& r, double lambda, double beta, double dropout, double l2,
                     std::uint64_t seed) {
    const auto& P = model.params();
    const Matrix& ew1 = P["enc_r.w1"];
    const Matrix& eb1 = P["enc_r.b1"];
    const Matrix& ew2 = P["enc_r.w2"];
    const Matrix& eb2 = P["enc_r.b2"];
    const Matrix& dw1 = P["dec_r.w1"];
    const Matrix& db1 = P["dec_r.b1"];
    const Matrix& dw2 = P["dec_r.w2"];
    const Matrix& db2 = P["dec_r.b2"];
    const int items = static_cast<int>(r.rows()), users = static_cast<int>(r.cols());
    const int hidden = static_cast<int>(ew1.rows()), H = model.shape().latent;

    RngStream rng(seed);
    std::vector<std::vector<double>> x(static_cast<std::size_t>(users), std::vector<double>(static_cast<std::size_t>(items)));
    for (int u = 0; u < users; ++u) {
        double norm = 0.0;
        for (int i = 0; i < items; ++i) norm += r(i, u) * r(i, u);
        norm = std::sqrt(norm);
        for (int i = 0; i < items; ++i) {
            const bool drop = rng.uniform() < dropout;
            x[u][i] = drop ? 0.0 : (norm > 0 ? r(i, u) / norm : 0.0) / (1.0 - dropout);
        }
    }
    std::vector<std::vector<double>> mu(users, std::vector<double>(H)), sigma(users, std::vector<double>(H));
    for (int u = 0; u < users; ++u) {
        std::vector<double> h(hidden);
        for (int j = 0; j < hidden; ++j) {
            double a = eb1(j, 0);
            for (int i = 0; i < items; ++i) a += ew1(j, i) * x[u][i];
            h[j] = std::tanh(a);
        }
        for (int o = 0; o < 2 * H; ++o) {
            double a = eb2(o, 0);
            for (int j = 0; j < hidden; ++j) a += ew2(o, j) * h[j];
            if (o < H) mu[u][o] = a;
            else sigma[u][o - H] = std::exp(a);
        }
    }
    long double total = 0.0L;
    std::vector<std::vector<double>> eps(users, std::vector<double>(H));
    for (int u = 0; u < users; ++u)
        for (int d = 0; d < H; ++d) eps[u][d] = rng.normal();
    for (int u = 0; u < users; ++u) {
        std::vector<double> z(H), h(hidden), logits(items);
        for (int d = 0; d < H; ++d) z[d] = mu[u][d] + eps[u][d] * sigma[u][d];
        for (int j = 0; j < hidden; ++j) {
            double a = db1(j, 0);
            for (int d = 0; d < H; ++d) a += dw1(j, d) * z[d];
            h[j] = std::tanh(a);
        }
        long double mx = -1e300L;
        for (int i = 0; i < items; ++i) {
            double a = db2(i, 0);
            for (int j = 0; j < hidden; ++j) a += dw2(i, j) * h[j];
            logits[i] = a;
            mx = std::max<long double>(mx, a);
        }
        long double se = 0.0L;
        for (int i = 0; i < items; ++i) se += std::exp(static_cast<long double>(logits[i]) - mx);
        const long double lse = mx + std::log(se);
        long double ll = 0.0L;
        for (int i = 0; i < items; ++i) ll += r(i, u) * (logits[i] - lse);
        long double kl = 0.0L;
        for (int d = 0; d < H; ++d)
            kl += 0.5L * (mu[u][d] * mu[u][d] + sigma[u][d] * sigma[u][d] - 1.0L - 2.0L * std::log((long double)sigma[u][d]));
        total += lambda * ll - beta * kl;
    }
    long double reg = 0.0L;
    for (std::size_t i = 0; i < P.size(); ++i) {
        const auto& name = P.name(i);
        if (!(name.ends_with(".w1") || name.ends_with(".w2"))) continue;
        for (Eigen::Index k = 0; k < P.at(i).size(); ++k) reg += P.at(i).data()[k] * P.at(i).data()[k];
    }
    return static_cast<double>(-total / users + l2 * reg);
}

bool bit_identical(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(real) * static_cast<std::size_t>(a.size())) == 0;
}

Outcome criterion_moe() {
    const ModelShape shape{20, 6, 4, 5};
    const MmsVae model = MmsVae::initialized(shape, 21);
    Batch batch = random_batch(8, 20, 6, 9);
    const Gaussian r = model.encode_r(batch.r), k = model.encode_k(batch.k);
    const Gaussian jr = model.encode_joint(batch.r, batch.k, Observation::ROnly);
    const Gaussian jk = model.encode_joint(batch.r, batch.k, Observation::KOnly);
    const Gaussian cr = moe_combine(r, k, 1.0), ck = moe_combine(r, k, 0.0);
    const bool identical = bit_identical(jr.mu, r.mu) && bit_identical(jr.sigma, r.sigma) &&
                           bit_identical(jk.mu, k.mu) && bit_identical(jk.sigma, k.sigma) &&
                           bit_identical(cr.mu, r.mu) && bit_identical(cr.sigma, r.sigma) &&
                           bit_identical(ck.mu, k.mu) && bit_identical(ck.sigma, k.sigma);

    TrainConfig cfg;
    cfg.latent = 4;
    cfg.hidden = 5;
    cfg.lambda = 1.7;
    cfg.l2 = 1e-4;
    cfg.dropout = 0.25;
    cfg.mode = TrainMode::ROnlyAblation;
    std::fill(batch.obs.begin(), batch.obs.end(), Observation::Both);
    double worst = 0.0;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        RngStream rng(seed);
        const double ours = training_objective(model, batch, cfg, 0.4, rng, false).loss;
        const double oracle = vae_cf_oracle(model, batch.r, cfg.lambda, 0.4, cfg.dropout, cfg.l2, seed);
        worst = std::max(worst, std::abs(ours - oracle));
    }
    return {identical && worst <= 1e-10,
            fmt("alpha=1/0 bit-identical: %s; ablation loss vs plain-loop VAE-CF bound: max |diff| %.2e",
                identical ? "yes" : "no", worst)};
}

// ---------------------------------------------------------------------------
// 4. Recommendation lift

Outcome criterion_lift() {
    const auto t0 = Clock::now();
    auto& s = system_state();
    const std::vector<int> cutoffs{10};
    const double pop = metric(eval::popularity_metrics(s.ds, s.ds.test, cutoffs), "NDCG", 0);
    const double ours = metric(eval::recommendation_metrics(s.trained->model, s.ds, s.ds.test, cutoffs), "NDCG", 0);
    const double secs = seconds_since(t0) + s.train_seconds;
    return {ours >= 1.5 * pop && secs < 180.0,
            fmt("test NDCG %.4f vs POP %.4f (ratio %.2f, need >= 1.50); %.1f s including training", ours, pop,
                ours / pop, secs)};
}

// ---------------------------------------------------------------------------
// 5. Cross-generation coherence

Outcome criterion_coherence() {
    auto& s = system_state();
    const std::vector<int> cutoffs{10};
    const double pop = metric(eval::popularity_metrics(s.ds, s.ds.test, cutoffs), "NDCG", 0);
    const double k_only =
        metric(eval::recommendation_metrics(s.trained->model, s.ds, s.ds.test, cutoffs, InputSource::Keyphrases),
               "NDCG", 0);
    const double full = metric(eval::recommendation_metrics(s.trained->model, s.ds, s.ds.test, cutoffs), "NDCG", 0);
    TrainConfig half = s.cfg;
    half.fully_observed = 0.5;
    const auto partial = train_model(s.ds, half);
    const double r_half = metric(eval::recommendation_metrics(partial.model, s.ds, s.ds.test, cutoffs), "NDCG", 0);
    const double degradation = (full - r_half) / full;
    return {k_only > pop && degradation <= 0.25,
            fmt("k-only NDCG %.4f vs POP %.4f; r-path NDCG full %.4f, 50%% observed %.4f (degradation %.1f%%, "
                "limit 25%%)",
                k_only, pop, full, r_half, 100 * degradation)};
}

// ---------------------------------------------------------------------------
// 6. Critiquing effect

Outcome criterion_critiquing() {
    auto& s = system_state();
    const auto& blender = trained_blender();
    RngStream rng(0x74657374ULL);
    const auto tuples = critiquing::generate_synthetic_dataset(s.ds.test, s.ds.keyphrases.item, rng);
    const auto ctx = critiquing::CritiqueContext::build(s.trained->model, s.ds);
    const auto prepared =
        critiquing::prepare_tuples(tuples, ctx, s.ds, static_cast<std::size_t>(s.blender_cfg.constraint_cap));
    const auto ev = critiquing::evaluate_critiquing(s.trained->model, ctx, s.ds, prepared, critiquing::BlendKind::Gru,
                                                    &blender.blender, s.blender_cfg.falling_map_topn);
    return {ev.mean_falling_map > 0 && ev.fraction_affected_dropped >= 0.8,
            fmt("%zu held-out tuples: mean Falling MAP@%d %.4f; affected items fell in mean rank in %.1f%% "
                "(need >= 80%%); blender best epoch %d",
                ev.count, s.blender_cfg.falling_map_topn, ev.mean_falling_map, 100 * ev.fraction_affected_dropped,
                blender.best_epoch)};
}

// ---------------------------------------------------------------------------
// 7. Multi-step ordering

Outcome criterion_multistep() {
    const auto t0 = Clock::now();
    auto& s = system_state();
    const auto& blender = trained_blender();
    eval::SimulationConfig cfg;
    cfg.top_n = {20};
    cfg.max_turns = 10;
    cfg.mode = eval::CandidateMode::Sampled;
    cfg.selector = eval::Selector::Random;
    cfg.seed = 0;
    double rate[3];
    const critiquing::BlendKind kinds[3] = {critiquing::BlendKind::Gru, critiquing::BlendKind::Uac,
                                            critiquing::BlendKind::Bac};
    for (int k = 0; k < 3; ++k) {
        cfg.blend = kinds[k];
        rate[k] = eval::simulate(s.trained->model, &blender.blender, s.ds, cfg).summaries[0].success_rate.mean;
    }
    const double secs = seconds_since(t0);
    return {rate[0] > rate[1] && rate[0] > rate[2] && secs < 300.0,
            fmt("top-20 success rate GRU %.4f, UAC %.4f, BAC %.4f; %.1f s", rate[0], rate[1], rate[2], secs)};
}

// ---------------------------------------------------------------------------
// 8. Speed property

Outcome criterion_speed() {
    auto& s = system_state();
    const auto& blender = trained_blender();
    const std::uint64_t steps_before = optimizer_step_counter().load();

    eval::LatencyConfig lat;
    lat.users = 100;
    lat.turns = 10;
    lat.runs = 10;
    const auto report = eval::measure_latency(s.trained->model, &blender.blender, s.ds, lat);

    // 1,000 critiques through a fresh single-threaded pass.
    lat.runs = 1;
    const auto t0 = Clock::now();
    const auto single = eval::measure_latency(s.trained->model, &blender.blender, s.ds, lat);
    const double secs = seconds_since(t0);

    // The service path as well.
    service::Service svc(s.trained->model, &blender.blender, s.ds, {});
    const auto created = svc.create_session({{"user_id", 0}});
    const std::string id = created.body["session_id"];
    int last_status = 0;
    for (int t = 0; t < 11; ++t) last_status = svc.post_critique(id, {{"keyphrase_id", t % 12}}).status;

    const std::uint64_t steps = optimizer_step_counter().load() - steps_before;
    const double t1 = report.per_turn_ms.front(), t10 = report.per_turn_ms.back();
    const bool pass = steps == 0 && t10 <= 2.0 * t1 && single.critiques == 1000 && secs < 10.0 && last_status == 409;
    return {pass, fmt("optimizer steps while serving: %llu; turn-1 %.4f ms, turn-10 %.4f ms (ratio %.2f); "
                      "1000 critiques in %.2f s; 11th critique status %d",
                      static_cast<unsigned long long>(steps), t1, t10, t10 / t1, secs, last_status)};
}

// ---------------------------------------------------------------------------
// 9. Oracle equivalence

namespace oracle {

double ndcg(const std::vector<int>& ranked, const std::set<int>& rel, int n) {
    double dcg = 0.0, idcg = 0.0;
    for (int pos = 0; pos < n && pos < static_cast<int>(ranked.size()); ++pos)
        if (rel.count(ranked[pos])) dcg += 1.0 / std::log2(pos + 2.0);
    for (int pos = 0; pos < std::min<int>(n, static_cast<int>(rel.size())); ++pos) idcg += 1.0 / std::log2(pos + 2.0);
    return dcg / idcg;
}

int hits_within(const std::vector<int>& ranked, const std::set<int>& rel, int n) {
    int h = 0;
    for (int pos = 0; pos < n && pos < static_cast<int>(ranked.size()); ++pos) h += rel.count(ranked[pos]) ? 1 : 0;
    return h;
}

double map(const std::vector<int>& ranked, const std::set<int>& rel, int n) {
    double sum = 0.0;
    for (int item : rel) {
        const int pos = static_cast<int>(std::find(ranked.begin(), ranked.end(), item) - ranked.begin());
        if (pos >= n || pos >= static_cast<int>(ranked.size())) continue;
        sum += static_cast<double>(hits_within(ranked, rel, pos + 1)) / (pos + 1);
    }
    return sum / std::min<int>(n, static_cast<int>(rel.size()));
}

}  // namespace oracle

Outcome criterion_oracles() {
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    double worst = 0.0;
    std::size_t cases = 0;
    std::vector<int> reference = perm;
    do {
        for (int mask = 1; mask < 64; ++mask) {
            std::set<int> rel;
            for (int i = 0; i < 6; ++i)
                if (mask & (1 << i)) rel.insert(i);
            const std::vector<int> relv(rel.begin(), rel.end());
            for (int n = 1; n <= 6; ++n) {
                const double checks[][2] = {
                    {eval::ndcg_at(perm, relv, n), oracle::ndcg(perm, rel, n)},
                    {eval::precision_at(perm, relv, n), static_cast<double>(oracle::hits_within(perm, rel, n)) / n},
                    {eval::recall_at(perm, relv, n), static_cast<double>(oracle::hits_within(perm, rel, n)) / rel.size()},
                    {eval::map_at(perm, relv, n), oracle::map(perm, rel, n)},
                    {eval::falling_map(reference, perm, relv, n), oracle::map(reference, rel, n) - oracle::map(perm, rel, n)},
                };
                for (const auto& c : checks) worst = std::max(worst, std::abs(c[0] - c[1]));
                cases += std::size(checks);
            }
            const int rsize = static_cast<int>(rel.size());
            worst = std::max(worst, std::abs(eval::r_precision(perm, relv) -
                                             static_cast<double>(oracle::hits_within(perm, rel, rsize)) / rsize));
            ++cases;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    // Synthetic tuples on a 3-user / 4-item / 3-keyphrase toy.
    const std::vector<std::vector<int>> item_kp{{}, {0}, {0, 1}, {0, 1, 2}};
    const std::vector<std::vector<int>> heldout_rows{{0, 1}, {2, 3}, {0, 1, 2, 3}};
    std::vector<Eigen::Triplet<real>> kt, ht;
    for (int i = 0; i < 4; ++i)
        for (int k : item_kp[i]) kt.emplace_back(i, k, 1.0);
    for (int u = 0; u < 3; ++u)
        for (int i : heldout_rows[u]) ht.emplace_back(u, i, 1.0);
    data::SparseMatrix kp(4, 3), heldout(3, 4);
    kp.setFromTriplets(kt.begin(), kt.end());
    heldout.setFromTriplets(ht.begin(), ht.end());

    using Triple = std::tuple<int, int, int>;
    std::set<Triple> enumeration;
    for (int u = 0; u < 3; ++u)
        for (int i : heldout_rows[u])
            for (int c = 0; c < 3; ++c)
                if (std::find(item_kp[i].begin(), item_kp[i].end(), c) == item_kp[i].end()) enumeration.insert({u, i, c});

    bool replay_ok = true;
    std::set<Triple> covered;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        RngStream rng(seed), mirror(seed);
        std::vector<std::string> warnings;
        const auto tuples = critiquing::generate_synthetic_dataset(heldout, kp, rng, &warnings);
        std::vector<critiquing::SyntheticCritiqueTuple> expected;
        for (int u = 0; u < 3; ++u)
            for (int i : heldout_rows[u]) {
                std::vector<int> cand;
                for (const auto& [tu, ti, tc] : enumeration)
                    if (tu == u && ti == i) cand.push_back(tc);
                if (cand.empty()) continue;
                const int c = cand[mirror.uniform_index(cand.size())];
                critiquing::SyntheticCritiqueTuple t{u, i, c, {}, {}};
                for (int j = 0; j < 4; ++j)
                    (std::find(item_kp[j].begin(), item_kp[j].end(), c) != item_kp[j].end() ? t.affected
                                                                                             : t.unaffected)
                        .push_back(j);
                expected.push_back(t);
            }
        replay_ok = replay_ok && tuples == expected && warnings.size() == 2;
        for (const auto& t : tuples) covered.insert({t.user, t.item, t.critique});
    }
    const bool pass = worst <= 1e-12 && replay_ok && covered == enumeration;
    return {pass, fmt("%zu metric checks over all 720 orderings x 63 relevant sets: max |diff| %.1e; synthetic "
                      "tuples match the enumeration replay for 300 seeds: %s; coverage %zu/%zu triples",
                      cases, worst, replay_ok ? "yes" : "no", covered.size(), enumeration.size())};
}

// ---------------------------------------------------------------------------
// 10. Determinism and round trip

std::vector<RankedList> all_rankings(const MmsVae& model, const data::DatasetSplit& ds) {
    std::vector<RankedList> out;
    for (int u = 0; u < ds.num_users(); ++u) {
        const Matrix r = data::rows_as_columns(ds.train, {u});
        out.push_back(recommend_topn(model, model.encode_r(r).mu.col(0), ds.num_items(), data::row_indices(ds.train, u)));
    }
    return out;
}

bool same_rankings(const std::vector<RankedList>& a, const std::vector<RankedList>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].ids != b[i].ids || a[i].scores != b[i].scores) return false;
    return true;
}

Outcome criterion_determinism() {
    auto& s = system_state();
    const auto dir = testing::scratch_dir("acceptance_determinism");
    TrainConfig cfg = s.cfg;
    cfg.epochs = 10;
    cfg.seed = 3;
    save_checkpoint(dir / "a.ckpt", train_model(s.ds, cfg).model, cfg);
    save_checkpoint(dir / "b.ckpt", train_model(s.ds, cfg).model, cfg);
    const bool model_bits = sha256_file(dir / "a.ckpt") == sha256_file(dir / "b.ckpt");

    critiquing::BlenderConfig bcfg = s.blender_cfg;
    bcfg.epochs = 3;
    RngStream rng(5);
    const auto tuples = critiquing::generate_synthetic_dataset(s.ds.validation, s.ds.keyphrases.item, rng);
    const auto loaded_a = load_checkpoint(dir / "a.ckpt");
    critiquing::save_blender(dir / "a.blend", critiquing::train_blender(loaded_a.model, s.ds, tuples, bcfg).blender,
                             bcfg, "x");
    critiquing::save_blender(dir / "b.blend", critiquing::train_blender(loaded_a.model, s.ds, tuples, bcfg).blender,
                             bcfg, "x");
    const bool blender_bits = sha256_file(dir / "a.blend") == sha256_file(dir / "b.blend");

    // Round trips: trained model, blender and dataset bundle.
    save_checkpoint(dir / "trained.ckpt", s.trained->model, s.cfg);
    const auto reloaded = load_checkpoint(dir / "trained.ckpt");
    const auto reference = all_rankings(s.trained->model, s.ds);
    const bool model_trip = same_rankings(reference, all_rankings(reloaded.model, s.ds));

    data::write_bundle(dir / "bundle", s.ds);
    const auto ds2 = data::read_bundle(dir / "bundle");
    const bool bundle_trip = same_rankings(reference, all_rankings(reloaded.model, ds2));

    const auto& blender = trained_blender();
    critiquing::save_blender(dir / "trained.blend", blender.blender, s.blender_cfg, "x");
    const auto lb = critiquing::load_blender(dir / "trained.blend");
    const critiquing::CritiqueEngine e1(s.trained->model, &blender.blender, {});
    const critiquing::CritiqueEngine e2(reloaded.model, &lb.blender, {});
    bool critique_trip = true;
    for (int u = 0; u < s.ds.num_users(); u += 7) {
        const Matrix r = data::rows_as_columns(s.ds.train, {u});
        const Vector z0 = s.trained->model.encode_r(r).mu.col(0);
        auto a = e1.start(z0, data::row_indices(s.ds.train, u));
        auto b = e2.start(z0, data::row_indices(s.ds.train, u));
        for (int c : {1, 4, 7}) {
            e1.apply_critique(a, c);
            e2.apply_critique(b, c);
            critique_trip = critique_trip && a.ranking.ids == b.ranking.ids && a.ranking.scores == b.ranking.scores;
        }
    }
    const bool pass = model_bits && blender_bits && model_trip && bundle_trip && critique_trip;
    return {pass, fmt("identical checkpoint bytes: model %s, blender %s; rankings preserved after reload: model %s, "
                      "bundle %s, critiqued sessions %s",
                      model_bits ? "yes" : "no", blender_bits ? "yes" : "no", model_trip ? "yes" : "no",
                      bundle_trip ? "yes" : "no", critique_trip ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"gradient fidelity", criterion_gradients},
        {"KL correctness", criterion_kl},
        {"MoE degeneracy", criterion_moe},
        {"recommendation lift", criterion_lift},
        {"cross-generation coherence", criterion_coherence},
        {"critiquing effect", criterion_critiquing},
        {"multi-step ordering", criterion_multistep},
        {"speed property", criterion_speed},
        {"oracle equivalence", criterion_oracles},
        {"determinism and round trip", criterion_determinism},
    };
    int failed = 0, index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s  %2d. %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed;
}
