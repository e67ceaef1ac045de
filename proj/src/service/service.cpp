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

#include "mmsvae/service/service.hpp"

#include <cstdio>
#include <random>

#include "mmsvae/model/checkpoint.hpp"

namespace mmsvae::service {

namespace {

class RequestError : public std::runtime_error {
public:
    RequestError(int status, std::string code, const std::string& message)
        : std::runtime_error(message), status(status), code(std::move(code)) {}
    int status;
    std::string code;
};

int parse_id(const json& v, const std::vector<std::string>& names, int size, const char* what) {
    if (v.is_number_integer()) {
        const auto id = v.get<long long>();
        if (id < 0 || id >= size) throw RequestError(400, std::string("invalid_") + what, std::string(what) + " id out of range");
        return static_cast<int>(id);
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == s) return static_cast<int>(i);
        throw RequestError(400, std::string("invalid_") + what, std::string("unknown ") + what + " '" + s + "'");
    }
    throw RequestError(400, std::string("invalid_") + what, std::string(what) + " must be an integer id or a name");
}

}  // namespace

Response error_response(int status, const std::string& code, const std::string& message) {
    return {status, json{{"code", code}, {"message", message}}};
}

Service::Service(const MmsVae& model, const critiquing::Blender* blender, const data::DatasetSplit& ds,
                 ServiceConfig cfg)
    : model_(&model), blender_(blender), ds_(&ds), cfg_(std::move(cfg)),
      engine_(model, blender, critiquing::SessionConfig{cfg_.top_n, cfg_.max_turns, cfg_.blend, cfg_.explain_k}) {
    require_shape(ds.num_items() == model.shape().num_items && ds.num_keyphrases() == model.shape().num_keyphrases,
                  "service: dataset does not match the model");
}

std::string Service::new_id() {
    static thread_local std::random_device device;
    std::string id;
    for (;;) {
        std::uint64_t hi = (std::uint64_t(device()) << 32) | device();
        std::uint64_t lo = (std::uint64_t(device()) << 32) | device();
        char buf[33];
        std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                      static_cast<unsigned long long>(lo));
        id = buf;
        if (!sessions_.contains(id)) return id;
    }
}

std::size_t Service::purge_expired() {
    std::lock_guard lock(store_mutex_);
    const auto now = now_();
    std::size_t purged = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (now - it->second->last_used > cfg_.session_ttl) {
            it = sessions_.erase(it);
            ++purged;
        } else {
            ++it;
        }
    }
    return purged;
}

std::size_t Service::session_count() {
    purge_expired();
    std::lock_guard lock(store_mutex_);
    return sessions_.size();
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) {
    purge_expired();
    std::lock_guard lock(store_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw RequestError(404, "session_not_found", "unknown or expired session '" + id + "'");
    return it->second;
}

json Service::session_view(const Entry& e) const {
    const auto& s = e.session;
    json items = json::array();
    for (std::size_t r = 0; r < s.ranking.size(); ++r) {
        const int i = s.ranking.ids[r];
        json kps = json::array();
        for (int k : data::row_indices(ds_->keyphrases.item, i))
            kps.push_back({{"keyphrase_id", k}, {"keyphrase", ds_->vocabulary[static_cast<std::size_t>(k)]}});
        json prev = nullptr;
        if (e.previous_scores.size() > 0)
            prev = rank_position(e.previous_scores, i, &s.excluded, s.candidates.empty() ? nullptr : &s.candidates) + 1;
        items.push_back({{"item_id", i},
                         {"name", ds_->item_names[static_cast<std::size_t>(i)]},
                         {"rank", r + 1},
                         {"previous_rank", prev},
                         {"score", s.ranking.scores[r]},
                         {"keyphrases", kps}});
    }
    json explanation = json::array();
    const RankedList ex = explain_topk(*model_, s.blended, cfg_.explain_k);
    for (std::size_t r = 0; r < ex.size(); ++r)
        explanation.push_back({{"keyphrase_id", ex.ids[r]},
                               {"keyphrase", ds_->vocabulary[static_cast<std::size_t>(ex.ids[r])]},
                               {"score", ex.scores[r]}});
    json critiques = json::array();
    for (int c : s.critiques)
        critiques.push_back({{"keyphrase_id", c}, {"keyphrase", ds_->vocabulary[static_cast<std::size_t>(c)]}});
    return {{"session_id", s.id},
            {"user_id", s.user >= 0 ? json(s.user) : json(nullptr)},
            {"turn", s.turn()},
            {"remaining_turns", s.closed ? 0 : cfg_.max_turns - s.turn()},
            {"closed", s.closed},
            {"critiques", critiques},
            {"items", items},
            {"explanation", explanation}};
}

Response Service::create_session(const json& request) {
    try {
        if (!request.is_object()) throw RequestError(400, "invalid_request", "body must be a JSON object");
        int user = -1;
        if (request.contains("user_id") && !request["user_id"].is_null())
            user = parse_id(request["user_id"], ds_->user_names, ds_->num_users(), "user");
        std::vector<int> kps;
        if (request.contains("keyphrases") && !request["keyphrases"].is_null()) {
            if (!request["keyphrases"].is_array())
                throw RequestError(400, "invalid_keyphrase", "keyphrases must be an array");
            for (const auto& k : request["keyphrases"])
                kps.push_back(parse_id(k, ds_->vocabulary, ds_->num_keyphrases(), "keyphrase"));
        }
        if (user < 0 && kps.empty())
            throw RequestError(400, "invalid_request", "a known user_id or a non-empty keyphrases list is required");

        Matrix k = Matrix::Zero(ds_->num_keyphrases(), 1);
        for (int c : kps) k(c, 0) = 1;
        Vector z0;
        std::vector<int> exclude;
        if (user >= 0) {
            const Matrix r = data::rows_as_columns(ds_->train, {user});
            exclude = data::row_indices(ds_->train, user);
            z0 = kps.empty() ? model_->encode_r(r).mu.col(0) : model_->encode_joint(r, k, Observation::Both).mu.col(0);
        } else {
            z0 = model_->encode_k(k).mu.col(0);
        }

        auto entry = std::make_shared<Entry>();
        entry->session = engine_.start(z0, exclude, {}, user);
        entry->last_used = now_();
        {
            std::lock_guard lock(store_mutex_);
            entry->session.id = new_id();
            sessions_.emplace(entry->session.id, entry);
        }
        return {201, session_view(*entry)};
    } catch (const RequestError& e) {
        return error_response(e.status, e.code, e.what());
    }
}

Response Service::get_session(const std::string& id) {
    try {
        auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        entry->last_used = now_();
        return {200, session_view(*entry)};
    } catch (const RequestError& e) {
        return error_response(e.status, e.code, e.what());
    }
}

Response Service::post_critique(const std::string& id, const json& request) {
    try {
        auto entry = find(id);
        if (!request.is_object() || !request.contains("keyphrase_id"))
            throw RequestError(400, "invalid_keyphrase", "keyphrase_id is required");
        const int c = parse_id(request["keyphrase_id"], ds_->vocabulary, ds_->num_keyphrases(), "keyphrase");
        std::lock_guard lock(entry->mutex);
        entry->last_used = now_();
        Vector previous = entry->session.scores;
        try {
            engine_.apply_critique(entry->session, c);
        } catch (const critiquing::TurnBudgetExhausted& e) {
            json body = session_view(*entry);
            body["code"] = "turn_budget_exhausted";
            body["message"] = e.what();
            return {409, body};
        }
        entry->previous_scores = std::move(previous);
        return {200, session_view(*entry)};
    } catch (const RequestError& e) {
        return error_response(e.status, e.code, e.what());
    }
}

Response Service::reset_session(const std::string& id) {
    try {
        auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        entry->last_used = now_();
        engine_.reset(entry->session);
        entry->previous_scores.resize(0);
        return {200, session_view(*entry)};
    } catch (const RequestError& e) {
        return error_response(e.status, e.code, e.what());
    }
}

Response Service::catalog() const {
    json items = json::array();
    for (int i = 0; i < ds_->num_items(); ++i)
        items.push_back({{"item_id", i},
                         {"name", ds_->item_names[static_cast<std::size_t>(i)]},
                         {"keyphrase_ids", data::row_indices(ds_->keyphrases.item, i)}});
    json vocab = json::array();
    for (int k = 0; k < ds_->num_keyphrases(); ++k)
        vocab.push_back({{"keyphrase_id", k}, {"keyphrase", ds_->vocabulary[static_cast<std::size_t>(k)]}});
    json users = json::array();
    for (const auto& u : ds_->user_names) users.push_back(u);
    return {200, {{"items", items}, {"keyphrases", vocab}, {"users", users}}};
}

Response Service::health() const {
    return {200,
            {{"status", "ok"},
             {"model_hash", cfg_.model_hash},
             {"blender_hash", cfg_.blender_hash},
             {"checkpoint_version", kCheckpointVersion},
             {"blend", critiquing::to_string(cfg_.blend)},
             {"max_turns", cfg_.max_turns},
             {"num_items", ds_->num_items()},
             {"num_keyphrases", ds_->num_keyphrases()}}};
}

}  // namespace mmsvae::service
