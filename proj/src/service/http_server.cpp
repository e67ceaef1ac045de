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

#include "mmsvae/service/http_server.hpp"

#include <httplib.h>

namespace mmsvae::service {

struct HttpServer::Impl {
    httplib::Server server;
};

namespace {

void reply(httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

bool parse_body(const httplib::Request& req, httplib::Response& res, json& out) {
    if (req.body.empty()) {
        out = json::object();
        return true;
    }
    out = json::parse(req.body, nullptr, false);
    if (out.is_discarded()) {
        reply(res, error_response(400, "invalid_json", "request body is not valid JSON"));
        return false;
    }
    return true;
}

}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>()) {
    auto& srv = impl_->server;
    srv.Post("/v1/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
        json body;
        if (parse_body(req, res, body)) reply(res, service.create_session(body));
    });
    srv.Get(R"(/v1/sessions/([0-9a-f]+))", [&service](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.get_session(req.matches[1]));
    });
    srv.Post(R"(/v1/sessions/([0-9a-f]+)/critiques)",
             [&service](const httplib::Request& req, httplib::Response& res) {
                 json body;
                 if (parse_body(req, res, body)) reply(res, service.post_critique(req.matches[1], body));
             });
    srv.Post(R"(/v1/sessions/([0-9a-f]+)/reset)", [&service](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.reset_session(req.matches[1]));
    });
    srv.Get("/v1/catalog", [&service](const httplib::Request&, httplib::Response& res) { reply(res, service.catalog()); });
    srv.Get("/v1/health", [&service](const httplib::Request&, httplib::Response& res) { reply(res, service.health()); });
    srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            const auto r = error_response(res.status, res.status == 404 ? "not_found" : "http_error",
                                          httplib::status_message(res.status));
            res.set_content(r.body.dump(), "application/json");
        }
    });
    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            message = e.what();
        } catch (...) {
        }
        reply(res, error_response(500, "internal", message));
    });
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace mmsvae::service
