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

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmsvae/critiquing/blender_trainer.hpp"
#include "mmsvae/data/fixture.hpp"
#include "mmsvae/data/io.hpp"
#include "mmsvae/eval/evaluate.hpp"
#include "mmsvae/eval/latency.hpp"
#include "mmsvae/eval/simulation.hpp"
#include "mmsvae/model/checkpoint.hpp"
#include "mmsvae/service/http_server.hpp"
#include "mmsvae/util/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mmsvae;

namespace {

struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A bundle directory hashes as the digest of its files' digests.
std::string artifact_hash(const fs::path& path) {
    if (!fs::exists(path)) throw ArtifactError("missing artifact: " + path.string());
    if (!fs::is_directory(path)) return sha256_file(path);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path))
        if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string all;
    for (const auto& f : files) all += f.filename().string() + ':' + sha256_file(f) + '\n';
    return sha256_hex(all);
}

// Checks an input against the manifest of the run that produced it, when
// there is one.
std::string verified_hash(const fs::path& path) {
    const std::string hash = artifact_hash(path);
    const fs::path dir = fs::is_directory(path) ? path : path.parent_path();
    const fs::path manifest = (dir.empty() ? fs::path(".") : dir) / "manifest.json";
    if (!fs::exists(manifest)) return hash;
    json m;
    std::ifstream(manifest) >> m;
    const std::string key = fs::is_directory(path) ? "." : path.filename().string();
    if (m.contains("outputs") && m["outputs"].contains(key) && m["outputs"][key].get<std::string>() != hash)
        throw ArtifactError(path.string() + " does not match the hash recorded in " + manifest.string());
    return hash;
}

class Run {
public:
    Run(std::string command, fs::path out) : command_(std::move(command)), out_(std::move(out)) {
        fs::create_directories(out_);
        start_ = std::chrono::steady_clock::now();
    }

    const fs::path& dir() const { return out_; }
    fs::path path(const std::string& name) const { return out_ / name; }

    void input(const std::string& role, const fs::path& p) {
        inputs_[role] = {{"path", p.string()}, {"sha256", verified_hash(p)}};
    }
    void config(const std::string& key, json value) { config_[key] = std::move(value); }
    void seed(std::uint64_t s) { seed_ = s; }
    void output(const std::string& name) { outputs_.push_back(name); }

    void write_manifest() const {
        json outputs = json::object();
        for (const auto& name : outputs_)
            outputs[name] = artifact_hash(name == "." ? out_ : out_ / name);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const json m{{"command", command_},   {"config", config_}, {"seed", seed_}, {"inputs", inputs_},
                     {"outputs", outputs},     {"wall_clock_seconds", secs}};
        std::ofstream(out_ / "manifest.json") << m.dump(2) << '\n';
    }

private:
    std::string command_;
    fs::path out_;
    std::chrono::steady_clock::time_point start_;
    json inputs_ = json::object();
    json config_ = json::object();
    std::uint64_t seed_ = 0;
    std::vector<std::string> outputs_;
};

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) out.push_back(std::stoi(tok));
    if (out.empty()) throw ConfigError("empty list: '" + s + "'");
    return out;
}

json to_json(const std::map<std::string, std::string>& kv) {
    json j = json::object();
    for (const auto& [k, v] : kv) j[k] = v;
    return j;
}

void log(const std::string& msg) { std::cerr << msg << '\n'; }

service::HttpServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multimodal VAE conversational recommender"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string out;
    auto common = [&](CLI::App* cmd, bool needs_out = true) {
        cmd->add_option("--seed", seed, "Random seed (overrides config files)");
        cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
        auto* o = cmd->add_option("--out", out, "Run directory");
        if (needs_out) o->required();
    };

    // generate-fixture
    data::FixtureConfig fixture;
    auto* gen = app.add_subcommand("generate-fixture", "Write a synthetic low-rank dataset (ratings, reviews, vocab)");
    gen->add_option("--users", fixture.num_users);
    gen->add_option("--items", fixture.num_items);
    gen->add_option("--keyphrases", fixture.num_keyphrases);
    gen->add_option("--rank", fixture.rank);
    gen->add_option("--mention-probability", fixture.mention_probability);
    gen->add_option("--mention-sharpness", fixture.mention_sharpness);
    common(gen);

    // ingest
    std::string ratings, reviews, review_text, vocab, ratios_text = "0.6,0.2,0.2";
    double threshold = 3.5;
    auto* ingest = app.add_subcommand("ingest", "Binarize, split and build keyphrase matrices into a dataset bundle");
    ingest->add_option("--ratings", ratings, "CSV: user,item,rating")->required()->check(CLI::ExistingFile);
    ingest->add_option("--vocab", vocab, "One keyphrase per line")->required()->check(CLI::ExistingFile);
    auto* rev = ingest->add_option("--reviews", reviews, "CSV: user,item,keyphrase_ids (';'-separated)")
                    ->check(CLI::ExistingFile);
    ingest->add_option("--review-text", review_text, "CSV: user,item,text (keyphrases matched against vocab)")
        ->check(CLI::ExistingFile)
        ->excludes(rev);
    ingest->add_option("--threshold", threshold, "Positive if rating > threshold");
    ingest->add_option("--ratios", ratios_text, "train,validation,test");
    common(ingest);

    // train
    std::string bundle, config_path, model_path, blender_path;
    auto* train = app.add_subcommand("train", "Train the model; keeps the best validation-NDCG epoch");
    train->add_option("--bundle", bundle)->required()->check(CLI::ExistingDirectory);
    train->add_option("--config", config_path, "key = value hyperparameters")->check(CLI::ExistingFile);
    common(train);

    // train-blender
    auto* tblend = app.add_subcommand("train-blender", "Train the critique blender on the frozen model");
    tblend->add_option("--bundle", bundle)->required()->check(CLI::ExistingDirectory);
    tblend->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    tblend->add_option("--config", config_path)->check(CLI::ExistingFile);
    common(tblend);

    // eval
    std::string cutoffs_text = "5,10,20", split_name = "test";
    auto* evalc = app.add_subcommand("eval", "Recommendation and explanation metrics");
    evalc->add_option("--bundle", bundle)->required()->check(CLI::ExistingDirectory);
    evalc->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    evalc->add_option("--cutoffs", cutoffs_text);
    evalc->add_option("--split", split_name)->check(CLI::IsMember({"validation", "test"}));
    common(evalc);

    // simulate
    std::string blend_name = "gru", selector_name = "random", mode_name = "sampled", topn_text = "5,10,20";
    int max_turns = 10;
    auto* sim = app.add_subcommand("simulate", "Multi-step critiquing user simulation");
    sim->add_option("--bundle", bundle)->required()->check(CLI::ExistingDirectory);
    sim->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    sim->add_option("--blender", blender_path)->check(CLI::ExistingFile);
    sim->add_option("--blend", blend_name)->check(CLI::IsMember({"gru", "uac", "bac"}));
    sim->add_option("--selector", selector_name)->check(CLI::IsMember({"random", "pop", "diff"}));
    sim->add_option("--mode", mode_name)->check(CLI::IsMember({"sampled", "all"}));
    sim->add_option("--top-n", topn_text);
    sim->add_option("--max-turns", max_turns);
    common(sim);

    // bench
    eval::LatencyConfig lat;
    auto* bench = app.add_subcommand("bench", "Per-critique latency of single-user sessions");
    bench->add_option("--bundle", bundle)->required()->check(CLI::ExistingDirectory);
    bench->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    bench->add_option("--blender", blender_path)->check(CLI::ExistingFile);
    bench->add_option("--blend", blend_name)->check(CLI::IsMember({"gru", "uac", "bac"}));
    bench->add_option("--users", lat.users);
    bench->add_option("--runs", lat.runs);
    bench->add_option("--turns", lat.turns);
    common(bench);

    // serve
    service::ServiceConfig svc;
    int ttl_seconds = 3600;
    auto* serve = app.add_subcommand("serve", "Serve interactive critiquing sessions over HTTP");
    serve->add_option("--bundle", bundle)->required()->check(CLI::ExistingDirectory);
    serve->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    serve->add_option("--blender", blender_path)->check(CLI::ExistingFile);
    serve->add_option("--blend", blend_name)->check(CLI::IsMember({"gru", "uac", "bac"}));
    serve->add_option("--host", svc.host);
    serve->add_option("--port", svc.port);
    serve->add_option("--top-n", svc.top_n);
    serve->add_option("--max-turns", svc.max_turns);
    serve->add_option("--ttl", ttl_seconds, "Session time-to-live in seconds");
    common(serve, false);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto blend_kind = critiquing::blend_kind_from(blend_name);
        auto load_blender_if = [&](Run* run) -> std::optional<critiquing::LoadedBlender> {
            if (blend_kind != critiquing::BlendKind::Gru) return std::nullopt;
            if (blender_path.empty()) throw ArtifactError("--blender is required for --blend gru");
            if (run) run->input("blender", blender_path);
            auto lb = critiquing::load_blender(blender_path);
            const std::string mh = sha256_file(model_path);
            if (!lb.model_hash.empty() && lb.model_hash != mh)
                throw ArtifactError("blender " + blender_path + " was trained on a different model checkpoint");
            return lb;
        };

        if (*gen) {
            if (seed) fixture.seed = *seed;
            Run run("generate-fixture", out);
            run.seed(fixture.seed);
            run.config("users", fixture.num_users);
            run.config("items", fixture.num_items);
            run.config("keyphrases", fixture.num_keyphrases);
            run.config("rank", fixture.rank);
            run.config("mention_probability", fixture.mention_probability);
            run.config("mention_sharpness", fixture.mention_sharpness);
            const auto table = data::generate_fixture(fixture);
            data::write_ratings_csv(run.path("ratings.csv"), table);
            data::write_reviews_csv(run.path("reviews.csv"), table);
            data::write_vocabulary(run.path("vocab.txt"), table.vocabulary);
            for (const char* f : {"ratings.csv", "reviews.csv", "vocab.txt"}) run.output(f);
            run.write_manifest();
            log("fixture written to " + out);
        } else if (*ingest) {
            Run run("ingest", out);
            std::vector<double> parts;
            {
                std::stringstream ss(ratios_text);
                for (std::string tok; std::getline(ss, tok, ',');) parts.push_back(std::stod(tok));
            }
            if (parts.size() != 3) throw ConfigError("--ratios needs three comma-separated values");
            const std::uint64_t s = seed.value_or(0);
            run.seed(s);
            run.input("ratings", ratings);
            run.input("vocab", vocab);
            auto table = data::read_ratings_csv(ratings);
            table.vocabulary = data::read_vocabulary(vocab);
            if (!reviews.empty()) {
                run.input("reviews", reviews);
                data::read_reviews_csv(reviews, table);
            } else if (!review_text.empty()) {
                run.input("review_text", review_text);
                data::read_review_text_csv(review_text, table);
            }
            run.config("threshold", threshold);
            run.config("ratios", parts);
            std::vector<std::string> warnings;
            const auto ds = data::build_dataset(table, threshold, {parts[0], parts[1], parts[2]}, s, &warnings);
            for (const auto& w : warnings) log("warning: " + w);
            data::write_bundle(run.dir(), ds);
            run.output(".");
            run.write_manifest();
            log("bundle: " + std::to_string(ds.num_users()) + " users, " + std::to_string(ds.num_items()) +
                " items, " + std::to_string(ds.num_keyphrases()) + " keyphrases");
        } else if (*train) {
            Run run("train", out);
            run.input("bundle", bundle);
            TrainConfig cfg;
            if (!config_path.empty()) {
                run.input("config", config_path);
                cfg = train_config_from(read_key_values(config_path));
            }
            if (seed) cfg.seed = *seed;
            run.seed(cfg.seed);
            run.config("train", to_json(to_key_values(cfg)));
            const auto ds = data::read_bundle(bundle);
            std::ofstream logf(run.path("train_log.csv"));
            logf << "epoch,beta,loss,validation_ndcg\n";
            const auto result = train_model(ds, cfg, nullptr, [&](const EpochLog& e) {
                logf << e.epoch << ',' << e.beta << ',' << e.loss << ',';
                if (e.evaluated) logf << e.validation_ndcg;
                logf << '\n';
                if (e.evaluated)
                    log("epoch " + std::to_string(e.epoch) + " loss " + std::to_string(e.loss) + " val NDCG@" +
                        std::to_string(cfg.validation_topn) + " " + std::to_string(e.validation_ndcg));
            });
            logf.close();
            save_checkpoint(run.path("model.ckpt"), result.model, cfg);
            run.config("best_epoch", result.best_epoch);
            run.config("best_validation_ndcg", result.best_validation_ndcg);
            run.output("model.ckpt");
            run.output("train_log.csv");
            run.write_manifest();
            log("best epoch " + std::to_string(result.best_epoch) + " validation NDCG " +
                std::to_string(result.best_validation_ndcg));
        } else if (*tblend) {
            Run run("train-blender", out);
            run.input("bundle", bundle);
            run.input("model", model_path);
            critiquing::BlenderConfig cfg;
            if (!config_path.empty()) {
                run.input("config", config_path);
                cfg = critiquing::blender_config_from(read_key_values(config_path));
            }
            if (seed) cfg.seed = *seed;
            run.seed(cfg.seed);
            run.config("blender", to_json(critiquing::to_key_values(cfg)));
            const auto ds = data::read_bundle(bundle);
            const auto loaded = load_checkpoint(model_path);
            RngStream rng(cfg.seed ^ 0x616c6731ULL, 0);
            std::vector<std::string> warnings;
            const auto tuples =
                critiquing::generate_synthetic_dataset(ds.validation, ds.keyphrases.item, rng, &warnings);
            for (const auto& w : warnings) log("warning: " + w);
            critiquing::write_synthetic_dump(run.path("synthetic_tuples.csv"), tuples);
            std::ofstream logf(run.path("blender_log.csv"));
            logf << "epoch,loss,holdout_falling_map\n";
            const auto result = critiquing::train_blender(loaded.model, ds, tuples, cfg, [&](const auto& e) {
                logf << e.epoch << ',' << e.loss << ',' << e.holdout_falling_map << '\n';
                log("epoch " + std::to_string(e.epoch) + " loss " + std::to_string(e.loss) + " falling MAP " +
                    std::to_string(e.holdout_falling_map));
            });
            logf.close();
            critiquing::save_blender(run.path("blender.ckpt"), result.blender, cfg, sha256_file(model_path));
            run.config("best_epoch", result.best_epoch);
            run.config("best_falling_map", result.best_falling_map);
            for (const char* f : {"blender.ckpt", "synthetic_tuples.csv", "blender_log.csv"}) run.output(f);
            run.write_manifest();
        } else if (*evalc) {
            Run run("eval", out);
            run.input("bundle", bundle);
            run.input("model", model_path);
            run.config("cutoffs", cutoffs_text);
            run.config("split", split_name);
            const auto cutoffs = parse_int_list(cutoffs_text);
            const auto ds = data::read_bundle(bundle);
            const auto loaded = load_checkpoint(model_path);
            const auto& heldout = split_name == "test" ? ds.test : ds.validation;
            std::vector<eval::MetricRow> rows = eval::popularity_metrics(ds, heldout, cutoffs);
            for (auto src : {InputSource::Interactions, InputSource::Keyphrases, InputSource::Joint}) {
                auto part = eval::recommendation_metrics(loaded.model, ds, heldout, cutoffs, src);
                rows.insert(rows.end(), part.begin(), part.end());
            }
            eval::write_metrics_csv(run.path("recommendation.csv"), rows);
            eval::write_metrics_csv(run.path("explanation.csv"), eval::explanation_metrics(loaded.model, ds, cutoffs));
            for (const auto& r : rows)
                if (r.metric == "NDCG" && r.n == 0) log(r.method + " NDCG " + std::to_string(r.value.mean));
            run.output("recommendation.csv");
            run.output("explanation.csv");
            run.write_manifest();
        } else if (*sim) {
            Run run("simulate", out);
            run.input("bundle", bundle);
            run.input("model", model_path);
            eval::SimulationConfig cfg;
            cfg.top_n = parse_int_list(topn_text);
            cfg.max_turns = max_turns;
            cfg.mode = eval::candidate_mode_from(mode_name);
            cfg.selector = eval::selector_from(selector_name);
            cfg.blend = blend_kind;
            cfg.seed = seed.value_or(0);
            cfg.threads = threads;
            run.seed(cfg.seed);
            run.config("top_n", cfg.top_n);
            run.config("max_turns", cfg.max_turns);
            run.config("mode", mode_name);
            run.config("selector", selector_name);
            run.config("blend", blend_name);
            const auto ds = data::read_bundle(bundle);
            const auto loaded = load_checkpoint(model_path);
            const auto lb = load_blender_if(&run);
            const auto result = eval::simulate(loaded.model, lb ? &lb->blender : nullptr, ds, cfg);
            eval::write_simulation_csv(run.path("simulation.csv"), result, cfg);
            eval::write_simulation_records(run.path("records.csv"), result);
            for (const auto& s : result.summaries)
                log("top-" + std::to_string(s.top_n) + " success " + std::to_string(s.success_rate.mean) +
                    " length " + std::to_string(s.session_length.mean));
            run.output("simulation.csv");
            run.output("records.csv");
            run.write_manifest();
        } else if (*bench) {
            Run run("bench", out);
            run.input("bundle", bundle);
            run.input("model", model_path);
            lat.blend = blend_kind;
            lat.seed = seed.value_or(0);
            run.seed(lat.seed);
            run.config("users", lat.users);
            run.config("runs", lat.runs);
            run.config("turns", lat.turns);
            run.config("blend", blend_name);
            const auto ds = data::read_bundle(bundle);
            const auto loaded = load_checkpoint(model_path);
            const auto lb = load_blender_if(&run);
            const auto report = eval::measure_latency(loaded.model, lb ? &lb->blender : nullptr, ds, lat);
            eval::write_latency_csv(run.path("latency.csv"), report, lat);
            log("per critique " + std::to_string(report.per_critique_ms.mean) + " ms, total " +
                std::to_string(report.total_minutes.mean) + " min, optimizer steps " +
                std::to_string(report.optimizer_steps));
            run.output("latency.csv");
            run.write_manifest();
        } else if (*serve) {
            verified_hash(bundle);
            svc.model_hash = verified_hash(model_path);
            const auto ds = data::read_bundle(bundle);
            const auto loaded = load_checkpoint(model_path);
            const auto lb = load_blender_if(nullptr);
            if (lb) svc.blender_hash = verified_hash(blender_path);
            svc.blend = blend_kind;
            svc.session_ttl = std::chrono::seconds(ttl_seconds);
            service::Service service(loaded.model, lb ? &lb->blender : nullptr, ds, svc);
            service::HttpServer server(service);
            g_server = &server;
            std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
            std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
            log("listening on http://" + svc.host + ':' + std::to_string(svc.port));
            if (!server.listen(svc.host, svc.port)) throw std::runtime_error("cannot bind " + svc.host + ':' + std::to_string(svc.port));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
