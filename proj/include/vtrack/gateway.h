// Copyright 2026 The vtrack Authors
// SPDX-License-Identifier: Apache-2.0
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

#include "vtrack/engine.h"
#include "vtrack/error.h"
#include "vtrack/evac.h"
#include "vtrack/text_doc.h"
#include "vtrack/wire.h"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace vtrack {

enum class Role { Manager, Viewer };
std::string_view to_string(Role r);

struct Credentials {
    std::string manager_token;
    // Empty disables the viewer role.
    std::string viewer_token;
};

struct ApiRequest {
    std::string method; // GET | POST
    std::string path;   // /v1/...
    std::map<std::string, std::string> query;
    std::string body;
    // Raw Authorization header value, "Bearer <token>".
    std::string authorization;
};

struct ApiResponse {
    int status = 200;
    std::string body;
};

int http_status(ErrorCode code);

using Clock = std::function<Timestamp()>;
// Local wall clock, truncated to the second.
Timestamp wall_clock();

// Transport-independent gateway: routes /v1/ requests and wire frames into
// the engine and the outbox. Safe to call from many threads.
class Gateway {
public:
    // `outbox` may be null, in which case alert triggers fail with IoFailure.
    Gateway(std::shared_ptr<Engine> engine, std::shared_ptr<Outbox> outbox, Credentials credentials,
            Clock clock = wall_clock);

    ApiResponse handle(const ApiRequest& request);

    // One framed message from a reader node. `role` is the authenticated
    // role, absent for anonymous connections: reports and heartbeats are
    // accepted anonymously, rosters need the manager.
    wire::Reply handle_frame(std::string_view frame_bytes, std::optional<Role> role);
    wire::Reply handle_frame(const wire::Frame& frame, std::optional<Role> role);

    Engine& engine() noexcept { return *engine_; }
    Outbox* outbox() noexcept { return outbox_.get(); }
    // Role for an Authorization header value; nullopt if absent or unknown.
    std::optional<Role> authenticate(std::string_view authorization) const;

private:
    ApiResponse route(const ApiRequest& request, std::optional<Role> role);

    std::shared_ptr<Engine> engine_;
    std::shared_ptr<Outbox> outbox_;
    Credentials credentials_;
    Clock clock_;
};

} // namespace vtrack
