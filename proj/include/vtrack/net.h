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

#include "vtrack/gateway.h"
#include "vtrack/reader_node.h"

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
class Client;
} // namespace httplib

namespace vtrack {

struct Endpoint {
    std::string host = "127.0.0.1";
    int port = 0;

    // "host:port" or ":port". Throws Error(InvalidConfig).
    static Endpoint parse(std::string_view text);
    std::string str() const { return host + ":" + std::to_string(port); }
};

// Serves the /v1/ API. Port 0 picks a free port.
class HttpServer {
public:
    HttpServer(std::shared_ptr<Gateway> gateway, Endpoint listen);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds and starts serving in the background. Throws Error(IoFailure).
    void start();
    void stop();
    // Blocks until stop() is called from elsewhere.
    void wait();
    int port() const noexcept { return port_; }

private:
    std::shared_ptr<Gateway> gateway_;
    Endpoint listen_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

// Persistent-connection ingest: frames in, one reply line per frame out.
// Connections are anonymous, so only reports and heartbeats are accepted.
class IngestServer {
public:
    IngestServer(std::shared_ptr<Gateway> gateway, Endpoint listen);
    ~IngestServer();
    IngestServer(const IngestServer&) = delete;
    IngestServer& operator=(const IngestServer&) = delete;

    void start();
    void stop();
    int port() const noexcept { return port_; }
    std::uint64_t frames_handled() const noexcept { return frames_; }

private:
    void accept_loop();
    void serve(int fd);

    std::shared_ptr<Gateway> gateway_;
    Endpoint listen_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> stopping_{false};
    std::atomic<std::uint64_t> frames_{0};
    std::thread acceptor_;
    std::mutex mu_;
    std::vector<std::thread> workers_;
    std::vector<int> open_fds_;
};

// Reader-side link over the persistent ingest port. Reconnects lazily after
// any failure.
class TcpLink : public GatewayLink {
public:
    explicit TcpLink(Endpoint gateway, int timeout_ms = 5000);
    ~TcpLink() override;
    wire::Reply send(const std::string& frame) override;

private:
    void drop();

    Endpoint gateway_;
    int timeout_ms_;
    int fd_ = -1;
    std::string pending_;
};

// Reader-side link over POST /v1/ingest.
class HttpLink : public GatewayLink {
public:
    HttpLink(Endpoint gateway, std::string token = {}, int timeout_ms = 5000);
    ~HttpLink() override;
    wire::Reply send(const std::string& frame) override;

private:
    std::unique_ptr<httplib::Client> client_;
    std::string token_;
};

// Client for the /v1/ API, used by the command line.
class ApiClient {
public:
    ApiClient(Endpoint gateway, std::string token, int timeout_ms = 10000);
    ~ApiClient();
    // Throws Error(IoFailure) when the gateway cannot be reached.
    ApiResponse get(const std::string& path, const std::map<std::string, std::string>& query = {});
    ApiResponse post(const std::string& path, const std::string& body);

private:
    std::unique_ptr<httplib::Client> client_;
    std::string token_;
    Endpoint gateway_;
};

} // namespace vtrack
