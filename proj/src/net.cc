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

#include "vtrack/net.h"

#include "vtrack/error.h"

#include <httplib.h>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace vtrack {

namespace {

constexpr const char* kTextType = "text/plain; charset=utf-8";

std::string errno_text() { return std::strerror(errno); }

int connect_to(const Endpoint& ep, int timeout_ms)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res) != 0) {
        return -1;
    }
    int fd = -1;
    for (auto* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) {
            continue;
        }
        timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
        ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
        ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            break;
        }
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    return fd;
}

bool write_all(int fd, std::string_view data)
{
    while (!data.empty()) {
        ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

wire::Reply unavailable(std::string why) { return wire::Reply{wire::Reply::Kind::Unavailable, 503, std::move(why)}; }

wire::Reply reply_from_http(const httplib::Result& res)
{
    if (!res) {
        return unavailable(httplib::to_string(res.error()));
    }
    try {
        auto line = TextDoc::parse(res->body).get("reply");
        if (line) {
            return wire::parse_reply(*line);
        }
    }
    catch (const Error&) {
    }
    if (res->status >= 500) {
        return unavailable("HTTP " + std::to_string(res->status));
    }
    return wire::Reply{wire::Reply::Kind::Reject, res->status, "HTTP " + std::to_string(res->status)};
}

httplib::Headers auth_headers(const std::string& token)
{
    httplib::Headers h;
    if (!token.empty()) {
        h.emplace("Authorization", "Bearer " + token);
    }
    return h;
}

} // namespace

Endpoint Endpoint::parse(std::string_view text)
{
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos) {
        throw Error(ErrorCode::InvalidConfig, "expected host:port, got '" + std::string(text) + "'");
    }
    Endpoint ep;
    if (colon > 0) {
        ep.host = std::string(text.substr(0, colon));
    }
    auto port = text.substr(colon + 1);
    auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), ep.port);
    if (ec != std::errc() || p != port.data() + port.size() || ep.port < 0 || ep.port > 65535) {
        throw Error(ErrorCode::InvalidConfig, "bad port in '" + std::string(text) + "'");
    }
    return ep;
}

HttpServer::HttpServer(std::shared_ptr<Gateway> gateway, Endpoint listen)
: gateway_(std::move(gateway)), listen_(std::move(listen)), server_(std::make_unique<httplib::Server>())
{
    auto handler = [gw = gateway_](const httplib::Request& req, httplib::Response& res) {
        ApiRequest r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params) {
            r.query.emplace(k, v);
        }
        r.body = req.body;
        r.authorization = req.get_header_value("Authorization");
        auto out = gw->handle(r);
        res.status = out.status;
        res.set_content(out.body, kTextType);
    };
    server_->Get(R"(/v1/.*)", handler);
    server_->Post(R"(/v1/.*)", handler);
    server_->Put(R"(/.*)", handler);
    server_->Delete(R"(/.*)", handler);
    server_->set_error_handler([gw = gateway_](const httplib::Request& req, httplib::Response& res) {
        if (res.body.empty()) {
            auto out = gw->handle(ApiRequest{req.method, req.path, {}, "", ""});
            res.set_content(out.body, kTextType);
        }
    });
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start()
{
    if (listen_.port == 0) {
        port_ = server_->bind_to_any_port(listen_.host);
    }
    else {
        port_ = server_->bind_to_port(listen_.host, listen_.port) ? listen_.port : -1;
    }
    if (port_ <= 0) {
        throw Error(ErrorCode::IoFailure, "cannot listen on " + listen_.str());
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void HttpServer::stop()
{
    if (server_) {
        server_->stop();
    }
    if (thread_.joinable()) {
        thread_.join();
    }
}

void HttpServer::wait()
{
    if (thread_.joinable()) {
        thread_.join();
    }
}

IngestServer::IngestServer(std::shared_ptr<Gateway> gateway, Endpoint listen)
: gateway_(std::move(gateway)), listen_(std::move(listen))
{
}

IngestServer::~IngestServer() { stop(); }

void IngestServer::start()
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    if (::getaddrinfo(listen_.host.c_str(), std::to_string(listen_.port).c_str(), &hints, &res) != 0 || !res) {
        throw Error(ErrorCode::IoFailure, "cannot resolve " + listen_.str());
    }
    listen_fd_ = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    bool ok = listen_fd_ >= 0 && ::bind(listen_fd_, res->ai_addr, res->ai_addrlen) == 0 && ::listen(listen_fd_, 64) == 0;
    ::freeaddrinfo(res);
    if (!ok) {
        auto why = errno_text();
        if (listen_fd_ >= 0) {
            ::close(listen_fd_);
        }
        listen_fd_ = -1;
        throw Error(ErrorCode::IoFailure, "cannot listen on " + listen_.str() + ": " + why);
    }
    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                                             : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    acceptor_ = std::thread([this] { accept_loop(); });
}

void IngestServer::accept_loop()
{
    while (!stopping_) {
        pollfd p{listen_fd_, POLLIN, 0};
        if (::poll(&p, 1, 200) <= 0) {
            continue;
        }
        int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) {
            continue;
        }
        std::lock_guard lock(mu_);
        open_fds_.push_back(fd);
        workers_.emplace_back([this, fd] { serve(fd); });
    }
}

void IngestServer::serve(int fd)
{
    wire::FrameReader reader;
    char buf[16384];
    bool open = true;
    while (open && !stopping_) {
        pollfd p{fd, POLLIN, 0};
        int r = ::poll(&p, 1, 200);
        if (r == 0) {
            continue;
        }
        ssize_t n = r > 0 ? ::recv(fd, buf, sizeof buf, 0) : -1;
        if (n <= 0) {
            if (n < 0 && errno == EINTR) {
                continue;
            }
            break;
        }
        reader.feed(std::string_view(buf, static_cast<std::size_t>(n)));
        try {
            while (auto frame = reader.next()) {
                auto reply = gateway_->handle_frame(*frame, std::nullopt);
                ++frames_;
                if (!write_all(fd, wire::format_reply(reply) + "\n")) {
                    open = false;
                    break;
                }
            }
        }
        catch (const Error& e) {
            // The stream cannot be resynchronised after a framing error.
            write_all(fd, wire::format_reply({wire::Reply::Kind::Reject, 400, std::string("FrameError ") + e.detail()}) +
                              "\n");
            open = false;
        }
    }
    std::lock_guard lock(mu_);
    auto it = std::find(open_fds_.begin(), open_fds_.end(), fd);
    if (it != open_fds_.end()) {
        open_fds_.erase(it);
        ::close(fd);
    }
}

void IngestServer::stop()
{
    if (listen_fd_ < 0) {
        return;
    }
    stopping_ = true;
    if (acceptor_.joinable()) {
        acceptor_.join();
    }
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(mu_);
        for (int fd : open_fds_) {
            ::shutdown(fd, SHUT_RDWR);
        }
        workers.swap(workers_);
    }
    for (auto& t : workers) {
        t.join();
    }
    ::close(listen_fd_);
    listen_fd_ = -1;
}

TcpLink::TcpLink(Endpoint gateway, int timeout_ms) : gateway_(std::move(gateway)), timeout_ms_(timeout_ms) {}

TcpLink::~TcpLink() { drop(); }

void TcpLink::drop()
{
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
    pending_.clear();
}

wire::Reply TcpLink::send(const std::string& frame)
{
    if (fd_ < 0) {
        fd_ = connect_to(gateway_, timeout_ms_);
        if (fd_ < 0) {
            return unavailable("cannot connect to " + gateway_.str());
        }
    }
    if (!write_all(fd_, frame)) {
        drop();
        return unavailable("send failed");
    }
    char buf[4096];
    while (pending_.find('\n') == std::string::npos) {
        ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            drop();
            return unavailable("connection lost before reply");
        }
        pending_.append(buf, static_cast<std::size_t>(n));
    }
    auto nl = pending_.find('\n');
    std::string line = pending_.substr(0, nl);
    pending_.erase(0, nl + 1);
    try {
        auto r = wire::parse_reply(line);
        if (r.kind == wire::Reply::Kind::Reject && r.status == 400 && line.find("FrameError") != std::string::npos) {
            drop(); // the server closes after a framing error
        }
        return r;
    }
    catch (const Error&) {
        drop();
        return unavailable("unreadable reply");
    }
}

HttpLink::HttpLink(Endpoint gateway, std::string token, int timeout_ms)
: client_(std::make_unique<httplib::Client>(gateway.host, gateway.port)), token_(std::move(token))
{
    client_->set_connection_timeout(0, timeout_ms * 1000);
    client_->set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    client_->set_keep_alive(true);
}

HttpLink::~HttpLink() = default;

wire::Reply HttpLink::send(const std::string& frame)
{
    return reply_from_http(client_->Post("/v1/ingest", auth_headers(token_), frame, kTextType));
}

ApiClient::ApiClient(Endpoint gateway, std::string token, int timeout_ms)
: client_(std::make_unique<httplib::Client>(gateway.host, gateway.port)), token_(std::move(token)), gateway_(gateway)
{
    client_->set_connection_timeout(0, timeout_ms * 1000);
    client_->set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
}

ApiClient::~ApiClient() = default;

ApiResponse ApiClient::get(const std::string& path, const std::map<std::string, std::string>& query)
{
    httplib::Params params(query.begin(), query.end());
    auto res = client_->Get(path, params, auth_headers(token_));
    if (!res) {
        throw Error(ErrorCode::IoFailure, "gateway " + gateway_.str() + " unreachable: " + httplib::to_string(res.error()));
    }
    return ApiResponse{res->status, res->body};
}

ApiResponse ApiClient::post(const std::string& path, const std::string& body)
{
    auto res = client_->Post(path, auth_headers(token_), body, kTextType);
    if (!res) {
        throw Error(ErrorCode::IoFailure, "gateway " + gateway_.str() + " unreachable: " + httplib::to_string(res.error()));
    }
    return ApiResponse{res->status, res->body};
}

} // namespace vtrack
