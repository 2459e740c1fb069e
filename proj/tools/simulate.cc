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

// simulate: generates visitor movement for a scenario and plays it through
// reader nodes, either into a running gateway or into an in-process engine
// that is then compared against the generated ground truth.

#include "vtrack/building_graph.h"
#include "vtrack/engine.h"
#include "vtrack/error.h"
#include "vtrack/gateway.h"
#include "vtrack/live_run.h"
#include "vtrack/net.h"
#include "vtrack/oracle.h"
#include "vtrack/simulator.h"
#include "vtrack/text_doc.h"

#include "cli_config.h"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace vtrack;

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out.flush()) {
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    }
}

// One trace file per planned checkpoint plus nodes.txt, so that a set of
// reader-node processes can replay the same run.
void emit_traces(const GroundTruth& gt, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    std::string index;
    for (const auto& c : gt.graph->checkpoints()) {
        auto it = gt.passages.find(c.node);
        std::string file = c.node.str() + ".trace";
        std::replace(file.begin(), file.end(), ':', '-');
        write_file(dir / file, render_trace(it == gt.passages.end() ? std::vector<Passage>{} : it->second));
        index += c.node.str() + " " + c.name + " " + c.room.str() + " " + file + "\n";
    }
    write_file(dir / "nodes.txt", index);
}

void check(const ApiResponse& r, const std::string& what, bool allow_conflict = false)
{
    if (r.status / 100 == 2 || (allow_conflict && r.status == 409)) {
        return;
    }
    std::string msg = what + ": HTTP " + std::to_string(r.status);
    try {
        auto doc = TextDoc::parse(r.body);
        if (auto m = doc.get("message")) {
            msg += ": " + *m;
        }
    }
    catch (const Error&) {
    }
    throw Error(ErrorCode::IoFailure, msg);
}

std::string body_of(std::initializer_list<std::pair<const char*, std::string>> fields)
{
    TextDoc doc;
    for (const auto& [k, v] : fields) {
        doc.set(k, v);
    }
    return doc.render();
}

void print_stats(const FeedStats& s)
{
    std::cout << "passages: " << s.passages << "\nissued: " << s.issued << "\nreturned: " << s.returned
              << "\nfirst: " << s.first.format() << "\nlast: " << s.last.format()
              << "\ndrained: " << (s.drained ? "yes" : "no") << "\n";
}

int run_remote(const GroundTruth& gt, const ScenarioParams& params, const DetectionModel& model, const Endpoint& ep,
               const std::string& token, const FeedOptions& opts)
{
    ApiClient api(ep, token);
    for (const auto& c : params.graph->checkpoints()) {
        check(api.post("/v1/checkpoints", body_of({{"node", c.node.str()},
                                                   {"name", c.name},
                                                   {"room", c.room.str()},
                                                   {"at", (params.start - 60).format()}})),
              "register checkpoint " + c.node.str(), true);
    }
    auto link = std::make_shared<HttpLink>(ep, token);
    auto nodes = make_nodes(*params.graph, link, model, params.seed);
    Desk desk{
        [&](const Trajectory& v) {
            check(api.post("/v1/visitors", body_of({{"tag", v.tag.str()},
                                                    {"name", v.name},
                                                    {"demographic", std::string(to_string(v.demographic))},
                                                    {"at", v.issued().format()}})),
                  "register visitor " + v.tag.str());
        },
        [&](const Trajectory& v) {
            check(api.post("/v1/visitors/" + v.tag.str() + "/return", body_of({{"at", v.returned().format()}})),
                  "return tag " + v.tag.str());
        },
    };
    auto stats = feed(gt, node_view(nodes), desk, opts);
    print_stats(stats);
    int rc = 0;
    for (const auto& [id, n] : nodes) {
        if (n->halted()) {
            std::cerr << "simulate: node " << id.str() << " halted: " << n->halt_reason() << std::endl;
            rc = 3;
        }
    }
    auto occ = api.get("/v1/occupancy");
    check(occ, "occupancy");
    std::cout << "\n" << occ.body;
    if (rc == 0 && !stats.drained) {
        rc = 4;
    }
    return rc;
}

int run_local(const GroundTruth& gt, const ScenarioParams& params, const DetectionModel& model,
              const FeedOptions& opts, bool strict)
{
    auto engine = std::make_shared<Engine>(params.graph, EngineConfig{});
    Timestamp setup = params.start - 60;
    for (const auto& c : params.graph->checkpoints()) {
        engine->register_checkpoint(c.node, c.name, c.room, setup);
    }
    auto gateway = std::make_shared<Gateway>(engine, nullptr, Credentials{"local", ""}, [setup] { return setup; });
    auto link = std::make_shared<FunctionLink>(
        [gateway](const std::string& frame) { return gateway->handle_frame(frame, std::nullopt); });
    auto nodes = make_nodes(*params.graph, link, model, params.seed);
    Desk desk{
        [&](const Trajectory& v) { engine->register_visitor(v.tag, v.name, v.demographic, v.issued()); },
        [&](const Trajectory& v) { engine->return_tag(v.tag, v.returned()); },
    };
    auto stats = feed(gt, node_view(nodes), desk, opts);
    print_stats(stats);

    auto s = engine->snapshot();
    std::uint64_t true_transitions = 0;
    for (const auto& v : gt.visitors) {
        true_transitions += v.stays.size() - 1;
    }
    auto oracle = oracle_violations(gt, *s);
    auto balance = balance_violations(gt, *s);
    std::cout << "records: " << s->last_seq() << "\ntrue_transitions: " << true_transitions
              << "\nobserved_transitions: " << observed_transitions(gt, *s)
              << "\noracle_violations: " << oracle.size() << (oracle.size() >= 20 ? "+" : "")
              << "\nbalance_violations: " << balance.size() << (balance.size() >= 20 ? "+" : "") << "\n";
    for (const auto& v : oracle) {
        std::cout << "  oracle: " << v << "\n";
    }
    for (const auto& v : balance) {
        std::cout << "  balance: " << v << "\n";
    }
    if (strict && (!oracle.empty() || !balance.empty())) {
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Visitor movement simulator"};
    std::string config_file, scenario, emit_truth, emit_traces_dir, gateway, token;
    std::optional<std::uint64_t> seed;
    std::optional<int> visitors;
    std::optional<std::int64_t> duration;
    DetectionModel model;
    FeedOptions opts;
    opts.speed = 0;
    double speed = 0;
    bool fast = false, truth_only = false, strict = false;

    app.add_option("--config", config_file, "INI file; keys are the long option names");
    app.add_option("--scenario", scenario, "scenario file (floor plan plus visitor model); default: built-in house");
    app.add_option("--seed", seed, "overrides the scenario seed");
    app.add_option("--visitors", visitors, "overrides the scenario visitor count");
    app.add_option("--duration-s", duration, "overrides the scenario arrival window");
    app.add_option("--p-detect", model.p_detect, "reader detection probability")->capture_default_str();
    app.add_option("--dup-min", model.dup_min, "fewest extra reads per passage")->capture_default_str();
    app.add_option("--dup-max", model.dup_max, "most extra reads per passage")->capture_default_str();
    auto* speed_opt = app.add_option("--speed", speed, "simulated seconds per wall second; 0 is unpaced")
                          ->capture_default_str();
    app.add_flag("--as-fast-as-possible", fast, "no pacing")->excludes(speed_opt);
    app.add_option("--drain-s", opts.drain_s, "seconds to keep nodes retrying after the last event")
        ->capture_default_str();
    app.add_option("--emit-truth", emit_truth, "write the ground truth (one stay per line) to this file");
    app.add_option("--emit-traces", emit_traces_dir, "write per-checkpoint passage traces to this directory");
    app.add_flag("--truth-only", truth_only, "generate and emit, do not run readers");
    app.add_option("--gateway", gateway, "HTTP address of a running gateway; default: in-process engine");
    app.add_option("--token", token, "manager token for --gateway")->envname("VTRACK_TOKEN");
    app.add_flag("--strict", strict, "exit 1 if the in-process engine disagrees with the ground truth");

    CLI11_PARSE(app, argc, argv);
    try {
        if (!config_file.empty()) {
            tools::apply_config(&app, config_file);
        }
        ScenarioParams params;
        if (!scenario.empty()) {
            params = load_scenario(scenario);
        }
        else {
            params.graph = std::make_shared<BuildingGraph>(default_building());
        }
        if (seed) {
            params.seed = *seed;
        }
        if (visitors) {
            params.n_visitors = *visitors;
        }
        if (duration) {
            params.duration_s = *duration;
        }
        params.validate();
        model.validate();
        opts.speed = fast ? 0 : speed;

        auto gt = generate(params);
        if (!emit_truth.empty()) {
            write_file(emit_truth, render_truth(gt));
        }
        if (!emit_traces_dir.empty()) {
            emit_traces(gt, emit_traces_dir);
        }
        if (truth_only) {
            std::size_t passages = 0;
            for (const auto& [n, ps] : gt.passages) {
                passages += ps.size();
            }
            std::cout << "visitors: " << gt.visitors.size() << "\npassages: " << passages << "\n";
            return 0;
        }
        if (!gateway.empty()) {
            if (token.empty()) {
                throw Error(ErrorCode::InvalidConfig, "--gateway needs --token or VTRACK_TOKEN");
            }
            return run_remote(gt, params, model, Endpoint::parse(gateway), token, opts);
        }
        return run_local(gt, params, model, opts, strict);
    }
    catch (const Error& e) {
        std::cerr << "simulate: " << e.what() << std::endl;
        return 2;
    }
}
