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

#include <memory>
#include <string>

#include "mmsvae/service/service.hpp"

namespace mmsvae::service {

// Binds the /v1 routes of a Service to an HTTP listener.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    // Binds and serves until stop(). Returns false if the bind fails.
    bool listen(const std::string& host, int port);
    // Binds to a free port and returns it, or -1. Serve with listen_after_bind().
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mmsvae::service
