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

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "mmsvae/critiquing/session.hpp"
#include "mmsvae/data/dataset.hpp"

namespace mmsvae::service {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    int top_n = 10;
    int max_turns = 10;
    int explain_k = 5;
    std::chrono::seconds session_ttl{3600};
    critiquing::BlendKind blend = critiquing::BlendKind::Gru;
    std::string model_hash;
    std::string blender_hash;
};

struct Response {
    int status = 200;
    json body;
};

// Request handlers for the /v1 API, independent of the transport. The
// model, blender and dataset are shared read-only; each session is guarded
// by its own mutex.
class Service {
public:
    Service(const MmsVae& model, const critiquing::Blender* blender, const data::DatasetSplit& ds,
            ServiceConfig cfg);

    Response create_session(const json& request);
    Response get_session(const std::string& id);
    Response post_critique(const std::string& id, const json& request);
    Response reset_session(const std::string& id);
    Response catalog() const;
    Response health() const;

    std::size_t session_count();
    std::size_t purge_expired();

    // Test hook.
    void set_clock(std::function<Clock::time_point()> now) { now_ = std::move(now); }

    const critiquing::CritiqueEngine& engine() const { return engine_; }

private:
    struct Entry {
        std::mutex mutex;
        critiquing::CritiqueSession session;
        Vector previous_scores;  // empty before the first critique
        Clock::time_point last_used;
    };

    std::shared_ptr<Entry> find(const std::string& id);
    json session_view(const Entry& entry) const;
    std::string new_id();

    const MmsVae* model_;
    const critiquing::Blender* blender_;
    const data::DatasetSplit* ds_;
    ServiceConfig cfg_;
    critiquing::CritiqueEngine engine_;
    std::function<Clock::time_point()> now_ = [] { return Clock::now(); };

    std::mutex store_mutex_;
    std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
};

Response error_response(int status, const std::string& code, const std::string& message);

}  // namespace mmsvae::service
