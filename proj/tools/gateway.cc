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

// gateway: the tracking service and its command-line client.

#include "vtrack/building_graph.h"
#include "vtrack/engine.h"
#include "vtrack/error.h"
#include "vtrack/evac.h"
#include "vtrack/gateway.h"
#include "vtrack/net.h"

#include "cli_config.h"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>
#include <pthread.h>

namespace {

using namespace vtrack;

struct ServiceOptions {
    std::string listen = "127.0.0.1:8080";
    std::string ingest_listen;
    std::string floor_plan;
    std::string manager_token;
    std::string viewer_token;
    std::int64_t dedup_window_s = 2;
    std::int64_t heartbeat_period_s = 10;
    std::string outbox;
    std::string data_dir = "vtrack-data";
    std::uint64_t snapshot_every = 10000;
    std::string config;
    std::int64_t alert_cooldown_s = Outbox::kDefaultCooldownS;
    bool no_sync = false;
};

void add_engine_options(CLI::App* cmd, ServiceOptions& o)
{
    cmd->add_option("--floor-plan", o.floor_plan, "floor-plan file (built-in house when omitted)");
    cmd->add_option("--dedup-window", o.dedup_window_s, "duplicate window in seconds")->capture_default_str();
    cmd->add_option("--heartbeat-period", o.heartbeat_period_s, "expected heartbeat period in seconds")
        ->capture_default_str();
    cmd->add_option("--data-dir", o.data_dir, "event log and snapshot directory")->capture_default_str();
}

struct ClientOptions {
    std::string gateway = "127.0.0.1:8080";
    std::string token;
    std::string at;
};

void add_client_options(CLI::App* cmd, ClientOptions& o)
{
    cmd->add_option("--gateway", o.gateway, "gateway HTTP address host:port")->capture_default_str();
    cmd->add_option("--token", o.token, "bearer token")->envname("VTRACK_TOKEN");
}

std::shared_ptr<const BuildingGraph> load_graph(const std::string& path)
{
    return std::make_shared<const BuildingGraph>(path.empty() ? default_building() : load_floor_plan(path));
}

EngineConfig engine_config(const ServiceOptions& o)
{
    if (o.dedup_window_s < 0 || o.heartbeat_period_s < 1) {
        throw Error(ErrorCode::InvalidConfig, "dedup window must be >= 0 and heartbeat period >= 1");
    }
    return EngineConfig{o.dedup_window_s, o.heartbeat_period_s};
}

int print(const ApiResponse& r)
{
    if (r.status >= 200 && r.status < 300) {
        std::cout << r.body;
        return 0;
    }
    std::cerr << "HTTP " << r.status << "\n" << r.body;
    return 1;
}

int serve(const ServiceOptions& o)
{
    if (o.manager_token.empty()) {
        throw Error(ErrorCode::InvalidConfig, "set manager-token in the config file or with --manager-token");
    }
    auto graph = load_graph(o.floor_plan);
    StoreOptions store;
    store.dir = o.data_dir;
    store.sync = !o.no_sync;
    auto engine = std::shared_ptr<Engine>(Engine::open(graph, engine_config(o), store, o.snapshot_every));
    for (const auto& w : engine->restore_warnings()) {
        std::cerr << "warning: " << w << "\n";
    }
    auto outbox = std::make_shared<Outbox>(o.outbox.empty() ? (std::filesystem::path(o.data_dir) / "outbox.txt").string()
                                                            : o.outbox,
                                           o.alert_cooldown_s);
    auto gw = std::make_shared<Gateway>(engine, outbox, Credentials{o.manager_token, o.viewer_token});

    auto http_ep = Endpoint::parse(o.listen);
    Endpoint ingest_ep = o.ingest_listen.empty() ? Endpoint{http_ep.host, http_ep.port ? http_ep.port + 1 : 0}
                                                 : Endpoint::parse(o.ingest_listen);

    // Block the stop signals before any server thread exists, then wait for
    // them here.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    HttpServer http(gw, http_ep);
    IngestServer ingest(gw, ingest_ep);
    http.start();
    ingest.start();
    std::cerr << "gateway: seq " << engine->last_seq() << ", http " << http_ep.host << ":" << http.port() << ", ingest "
              << ingest_ep.host << ":" << ingest.port() << std::endl;
    // Machine-readable line for harnesses that start on port 0.
    std::cout << "listening http=" << http.port() << " ingest=" << ingest.port() << std::endl;

    int sig = 0;
    sigwait(&stop_signals, &sig);
    std::cerr << "gateway: stopping on signal " << sig << std::endl;
    ingest.stop();
    http.stop();
    return 0;
}

int replay(const ServiceOptions& o)
{
    auto graph = load_graph(o.floor_plan);
    auto cfg = engine_config(o);
    if (!std::filesystem::is_directory(o.data_dir)) {
        throw Error(ErrorCode::InvalidConfig, "no data directory " + o.data_dir);
    }
    StoreOptions store;
    store.dir = o.data_dir;
    // Never takes a snapshot: the audit leaves the directory as found, apart
    // from the repair any open performs.
    auto engine = std::shared_ptr<Engine>(Engine::open(graph, cfg, store, 0));
    const EventStore& es = *engine->store();

    TrackingState full(graph, cfg);
    es.for_each_from(1, [&](const LogRecord& r) { full.apply(r); });
    const bool consistent = full.serialize() == engine->snapshot()->serialize();

    TextDoc doc;
    doc.set("data_dir", o.data_dir);
    doc.set("seq", static_cast<std::int64_t>(es.last_seq()));
    doc.set("segments", static_cast<std::int64_t>(es.segments().size()));
    doc.set("disk_bytes", static_cast<std::int64_t>(es.disk_bytes()));
    doc.set("repaired_bytes", static_cast<std::int64_t>(es.open_report().repaired_bytes));
    doc.set("snapshots", static_cast<std::int64_t>(es.snapshot_seqs().size()));
    doc.set("restore_matches_replay", consistent ? "yes" : "no");
    for (const auto& w : engine->restore_warnings()) {
        doc.set("warning", w);
    }
    std::cout << doc.render();

    Gateway gw(engine, nullptr, Credentials{"audit", ""});
    for (const char* path : {"/v1/occupancy", "/v1/diagnostics", "/v1/checkpoints"}) {
        auto r = gw.handle(ApiRequest{"GET", path, {}, "", "Bearer audit"});
        std::cout << r.body;
    }
    return consistent ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Visitor tracking gateway"};
    app.require_subcommand(1);

    ServiceOptions service;
    auto* serve_cmd = app.add_subcommand("serve", "run the HTTP API and the reader ingest port");
    serve_cmd->add_option("--config", service.config, "INI file; keys are the long option names");
    serve_cmd->add_option("--listen", service.listen, "HTTP listen address")->capture_default_str();
    serve_cmd->add_option("--ingest-listen", service.ingest_listen, "reader ingest address (default: HTTP port + 1)");
    serve_cmd->add_option("--manager-token", service.manager_token, "manager bearer token");
    serve_cmd->add_option("--viewer-token", service.viewer_token, "viewer bearer token");
    serve_cmd->add_option("--outbox", service.outbox, "alert outbox file (default: DATA_DIR/outbox.txt)");
    serve_cmd->add_option("--snapshot-every", service.snapshot_every, "records between snapshots")->capture_default_str();
    serve_cmd->add_option("--alert-cooldown", service.alert_cooldown_s, "seconds between alert triggers")
        ->capture_default_str();
    serve_cmd->add_flag("--no-sync", service.no_sync, "skip fsync (throwaway runs only)");
    add_engine_options(serve_cmd, service);

    ServiceOptions audit;
    auto* replay_cmd = app.add_subcommand("replay", "rebuild state from a data directory and print it");
    replay_cmd->add_option("--config", audit.config, "INI file; keys are the long option names");
    add_engine_options(replay_cmd, audit);

    ClientOptions client;
    std::string node, name, room, tag, demographic = "unspecified";

    auto* reg_cp = app.add_subcommand("register-checkpoint", "register a reader node");
    add_client_options(reg_cp, client);
    reg_cp->add_option("--node", node, "IPv4 or MAC address")->required();
    reg_cp->add_option("--name", name, "label, e.g. Rp1")->required();
    reg_cp->add_option("--room", room, "room the reader guards")->required();
    reg_cp->add_option("--at", client.at, "registration time DD-MM-YYYYThh:mm:ss");

    auto* reg_v = app.add_subcommand("register-visitor", "issue a tag to a visitor");
    add_client_options(reg_v, client);
    reg_v->add_option("--tag", tag, "ten hex digits")->required();
    reg_v->add_option("--name", name, "visitor name")->required();
    reg_v->add_option("--demographic", demographic, "female, male or unspecified")->capture_default_str();
    reg_v->add_option("--at", client.at, "issue time");

    auto* ret = app.add_subcommand("return-tag", "take a tag back");
    add_client_options(ret, client);
    ret->add_option("--tag", tag, "ten hex digits")->required();
    ret->add_option("--at", client.at, "return time");

    auto* occ = app.add_subcommand("occupancy", "per-room counts");
    add_client_options(occ, client);
    occ->add_option("--at", client.at, "historical instant");

    auto* evac = app.add_subcommand("evac-report", "occupied rooms with their routes out");
    add_client_options(evac, client);
    evac->add_option("--at", client.at, "historical instant");

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve_cmd->parsed()) {
            if (!service.config.empty()) {
                tools::apply_config(serve_cmd, service.config);
            }
            return serve(service);
        }
        if (replay_cmd->parsed()) {
            if (!audit.config.empty()) {
                tools::apply_config(replay_cmd, audit.config, true);
            }
            return replay(audit);
        }
        ApiClient api(Endpoint::parse(client.gateway), client.token);
        auto with_at = [&](std::string body) {
            if (!client.at.empty()) {
                body += "at: " + client.at + "\n";
            }
            return body;
        };
        std::map<std::string, std::string> query;
        if (!client.at.empty()) {
            query["at"] = client.at;
        }
        if (reg_cp->parsed()) {
            return print(api.post("/v1/checkpoints", with_at("node: " + node + "\nname: " + name + "\nroom: " + room + "\n")));
        }
        if (reg_v->parsed()) {
            return print(api.post("/v1/visitors", with_at("tag: " + tag + "\nname: " + name +
                                                          "\ndemographic: " + demographic + "\n")));
        }
        if (ret->parsed()) {
            return print(api.post("/v1/visitors/" + tag + "/return", with_at("")));
        }
        if (occ->parsed()) {
            return print(api.get("/v1/occupancy", query));
        }
        if (evac->parsed()) {
            return print(api.get("/v1/evac/report", query));
        }
    }
    catch (const CorruptLogError& e) {
        std::cerr << "gateway: corrupt log at seq " << e.seq() << ": " << e.what() << "\n";
        return 2;
    }
    catch (const Error& e) {
        std::cerr << "gateway: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
