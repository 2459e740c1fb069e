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

// reader-node: one checkpoint's reader agent.
//
// With --trace the passage schedule is replayed on a simulated clock that
// starts at the first passage. Without it, "TAGID [TIMESTAMP]" lines are
// read from standard input as they arrive and the wall clock drives the node.

#include "vtrack/error.h"
#include "vtrack/gateway.h"
#include "vtrack/net.h"
#include "vtrack/reader_node.h"
#include "vtrack/simulator.h"

#include "cli_config.h"

#include <CLI11.hpp>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace {

using namespace vtrack;

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::InvalidParams, "cannot read " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void report(const ReaderNode& node)
{
    const auto& s = node.stats();
    std::cerr << "reader-node " << node.config().node.str() << ": passages " << s.passages << ", observations "
              << s.observations << ", batches " << s.batches << ", acked " << s.acked << ", retries " << s.retries
              << ", heartbeats " << s.heartbeats_sent << ", undelivered " << node.undelivered() << std::endl;
    if (node.halted()) {
        std::cerr << "reader-node: halted: " << node.halt_reason() << std::endl;
    }
}

int run_trace(ReaderNode& node, const std::vector<Passage>& passages, double speed, std::int64_t drain_s)
{
    if (passages.empty()) {
        return 0;
    }
    std::multimap<Timestamp, TagId> due;
    for (const auto& p : passages) {
        due.emplace(p.at, p.tag);
    }
    const Timestamp first = due.begin()->first;
    const Timestamp last = due.rbegin()->first;
    const auto wall_start = std::chrono::steady_clock::now();
    for (Timestamp t = first;; t = t + 1) {
        if (t > last && (node.idle() || node.halted() || t - last > drain_s)) {
            break;
        }
        if (speed > 0) {
            std::this_thread::sleep_until(wall_start + std::chrono::duration<double>((t - first) / speed));
        }
        for (auto [it, end] = due.equal_range(t); it != end; ++it) {
            node.passage(it->second, t);
        }
        node.tick(t);
    }
    report(node);
    if (node.halted()) {
        return 3;
    }
    return node.idle() ? 0 : 4;
}

int run_live(ReaderNode& node)
{
    std::mutex mu;
    std::deque<std::string> lines;
    bool eof = false;
    std::thread input([&] {
        std::string line;
        while (std::getline(std::cin, line)) {
            std::lock_guard lock(mu);
            lines.push_back(line);
        }
        std::lock_guard lock(mu);
        eof = true;
    });
    input.detach();
    Timestamp now = wall_clock();
    node.tick(now);
    while (true) {
        std::deque<std::string> batch;
        bool done = false;
        {
            std::lock_guard lock(mu);
            batch.swap(lines);
            done = eof;
        }
        now = wall_clock();
        for (const auto& l : batch) {
            std::istringstream in(l);
            std::string tag, ts;
            if (!(in >> tag)) {
                continue;
            }
            try {
                in >> ts;
                node.passage(TagId::parse(tag), ts.empty() ? now : Timestamp::parse(ts));
            }
            catch (const Error& e) {
                std::cerr << "reader-node: skipped line '" << l << "': " << e.what() << std::endl;
            }
        }
        node.tick(now);
        if (node.halted()) {
            report(node);
            return 3;
        }
        if (done && node.idle()) {
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
    report(node);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Checkpoint reader node"};
    std::string config_file, node_id, gateway, trace, token;
    ReaderConfig cfg;
    std::string name = "Rp", room;
    double speed = 1.0;
    bool fast = false, http = false;
    std::int64_t drain_s = 600;

    app.add_option("--config", config_file, "INI file; keys are the long option names");
    app.add_option("--node-id", node_id, "IPv4 or MAC address of this node")->required();
    app.add_option("--name", name, "label reported with every record")->required();
    app.add_option("--room", room, "room whose entrance this reader guards")->required();
    app.add_option("--gateway", gateway, "gateway ingest address host:port (HTTP address with --http)")->required();
    app.add_flag("--http", http, "post frames to /v1/ingest instead of the persistent ingest port");
    app.add_option("--token", token, "bearer token for --http")->envname("VTRACK_TOKEN");
    app.add_option("--p-detect", cfg.model.p_detect, "detection probability")->capture_default_str();
    app.add_option("--read-range", cfg.model.read_range_m, "read range in metres")->capture_default_str();
    app.add_option("--dup-min", cfg.model.dup_min, "fewest extra reads per passage")->capture_default_str();
    app.add_option("--dup-max", cfg.model.dup_max, "most extra reads per passage")->capture_default_str();
    app.add_option("--window-s", cfg.window_s, "batch window in seconds")->capture_default_str();
    app.add_option("--heartbeat-s", cfg.heartbeat_s, "heartbeat period in seconds")->capture_default_str();
    app.add_option("--seed", cfg.seed, "detection random seed")->capture_default_str();
    app.add_option("--trace", trace, "passage schedule, one 'TAGID TIMESTAMP' per line");
    auto* speed_opt = app.add_option("--speed", speed, "simulated seconds per wall second with --trace")
                          ->capture_default_str();
    app.add_flag("--as-fast-as-possible", fast, "no pacing with --trace")->excludes(speed_opt);
    app.add_option("--drain-s", drain_s, "simulated seconds to keep retrying after the trace ends")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::RequiredError& e) {
        // Required options may come from the file.
        if (config_file.empty()) {
            return app.exit(e);
        }
    }
    catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        if (!config_file.empty()) {
            tools::apply_config(&app, config_file);
            for (const char* req : {"--node-id", "--name", "--room", "--gateway"}) {
                if (app.get_option(req)->empty()) {
                    throw Error(ErrorCode::InvalidConfig, std::string(req) + " is required");
                }
            }
        }
        cfg.node = NodeId::parse(node_id);
        cfg.name = name;
        cfg.room = RoomId::parse(room);
        auto ep = Endpoint::parse(gateway);
        std::shared_ptr<GatewayLink> link;
        if (http) {
            link = std::make_shared<HttpLink>(ep, token);
        }
        else {
            link = std::make_shared<TcpLink>(ep);
        }
        ReaderNode node(cfg, link);
        if (!trace.empty()) {
            auto passages = parse_trace(read_file(trace));
            return run_trace(node, passages, fast ? 0.0 : speed, drain_s);
        }
        return run_live(node);
    }
    catch (const Error& e) {
        std::cerr << "reader-node: " << e.what() << std::endl;
        return 2;
    }
}
