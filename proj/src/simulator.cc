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

#include "vtrack/simulator.h"

#include "vtrack/error.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace vtrack {

namespace {

[[noreturn]] void bad(const std::string& why) { throw Error(ErrorCode::InvalidParams, why); }

constexpr std::uint64_t kFirstTag = 0x01008C7200ull;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double unit() { return unit_interval(gen_()); }
    std::uint64_t below(std::uint64_t n) { return gen_() % n; }
    // Exponential with the given mean, rounded to whole seconds.
    std::int64_t exponential(double mean) { return std::llround(-mean * std::log1p(-unit())); }

private:
    std::mt19937_64 gen_;
};

// First step from `from` along a minimum-hop path to any room in `targets`,
// moving only through `allowed`; smallest room id wins ties.
std::optional<RoomId> step_toward(const BuildingGraph& g, const std::set<RoomId>& allowed, const RoomId& from,
                                  const std::set<RoomId>& targets)
{
    const int inf = std::numeric_limits<int>::max();
    std::vector<int> dist(g.room_count(), inf);
    std::deque<RoomId> queue;
    for (const auto& t : targets) {
        dist[g.index_of(t)] = 0;
        queue.push_back(t);
    }
    while (!queue.empty()) {
        RoomId r = queue.front();
        queue.pop_front();
        if (r == from) {
            continue;
        }
        for (const auto& n : g.neighbors(r)) {
            if ((allowed.count(n) || n == from) && dist[g.index_of(n)] == inf) {
                dist[g.index_of(n)] = dist[g.index_of(r)] + 1;
                queue.push_back(n);
            }
        }
    }
    int d = dist[g.index_of(from)];
    if (d == inf || d == 0) {
        return std::nullopt;
    }
    for (const auto& n : g.neighbors(from)) {
        if (dist[g.index_of(n)] == d - 1 && (allowed.count(n) || targets.count(n))) {
            return n;
        }
    }
    return std::nullopt;
}

std::string tag_text(std::uint64_t v)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%010llX", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t z = a * 0x9E3779B97F4A7C15ull + b + 0x632BE59BD9B4E019ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double unit_interval(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::string_view to_string(VisitPolicy p) { return p == VisitPolicy::RandomWalk ? "random_walk" : "tour_all_rooms"; }

VisitPolicy parse_visit_policy(std::string_view raw)
{
    if (raw == "random_walk") {
        return VisitPolicy::RandomWalk;
    }
    if (raw == "tour_all_rooms") {
        return VisitPolicy::TourAllRooms;
    }
    bad("unknown visit policy '" + std::string(raw) + "'");
}

void ScenarioParams::validate() const
{
    if (!graph) {
        bad("scenario has no building graph");
    }
    if (n_visitors < 0) {
        bad("visitor count must be >= 0");
    }
    if (!(arrival_mean_s > 0) || !(dwell_mean_s > 0) || !std::isfinite(arrival_mean_s) || !std::isfinite(dwell_mean_s)) {
        bad("arrival and dwell means must be positive");
    }
    if (dwell_min_s < 1) {
        bad("minimum dwell must be >= 1 s");
    }
    if (duration_s <= 0) {
        bad("duration must be positive");
    }
    if (static_cast<std::uint64_t>(n_visitors) > 0xFFFFFFFFull) {
        bad("too many visitors");
    }
}

GroundTruth generate(const ScenarioParams& params)
{
    params.validate();
    const BuildingGraph& g = *params.graph;
    GroundTruth gt;
    gt.graph = params.graph;

    std::set<RoomId> walkable{g.entrance()};
    std::map<RoomId, NodeId> reader_of;
    for (const auto& c : g.checkpoints()) {
        walkable.insert(c.room);
        reader_of.emplace(c.room, c.node);
        gt.passages[c.node];
    }
    std::set<RoomId> inside = walkable;
    inside.erase(g.entrance());
    const std::set<RoomId> home{g.entrance()};
    const Timestamp end = params.start + params.duration_s;

    Rng arrivals(mix_seed(params.seed, 0));
    Timestamp t = params.start;
    for (int i = 0; i < params.n_visitors; ++i) {
        t = t + arrivals.exponential(params.arrival_mean_s);
        if (t > end) {
            break;
        }
        Rng rng(mix_seed(params.seed, static_cast<std::uint64_t>(i) + 1));
        Trajectory v{TagId::parse(tag_text(kFirstTag + static_cast<std::uint64_t>(i))),
                     "Visitor Name" + std::to_string(i + 1), static_cast<Demographic>(rng.below(3)), {}};
        RoomId cur = g.entrance();
        Timestamp enter = t;
        std::set<RoomId> unvisited = inside;
        while (true) {
            Timestamp leave = enter + std::max(params.dwell_min_s, rng.exponential(params.dwell_mean_s));
            std::optional<RoomId> next;
            bool going_home = leave >= end;
            if (!going_home && params.policy == VisitPolicy::TourAllRooms) {
                unvisited.erase(cur);
                // Rooms reachable without crossing the entrance hall.
                std::set<RoomId> through = inside;
                next = unvisited.empty() ? std::nullopt : step_toward(g, through, cur, unvisited);
                going_home = !next;
            }
            else if (!going_home) {
                std::vector<RoomId> options;
                for (const auto& n : g.neighbors(cur)) {
                    if (walkable.count(n)) {
                        options.push_back(n);
                    }
                }
                if (!options.empty()) {
                    next = options[rng.below(options.size())];
                }
                going_home = !next;
            }
            if (going_home) {
                next = cur == g.entrance() ? std::nullopt : step_toward(g, walkable, cur, home);
            }
            v.stays.push_back(Stay{cur, enter, leave});
            if (!next) {
                break; // handed in at the entrance desk without moving
            }
            if (*next == g.entrance()) {
                v.stays.push_back(Stay{*next, leave, leave});
                break;
            }
            gt.passages[reader_of.at(*next)].push_back(Passage{v.tag, leave});
            cur = *next;
            enter = leave;
        }
        gt.visitors.push_back(std::move(v));
    }
    for (auto& [node, list] : gt.passages) {
        std::stable_sort(list.begin(), list.end(), [](const Passage& a, const Passage& b) { return a.at < b.at; });
    }
    return gt;
}

std::map<RoomId, std::int64_t> truth_occupancy(const GroundTruth& gt, Timestamp at)
{
    std::map<RoomId, std::int64_t> out;
    for (const auto& r : gt.graph->rooms()) {
        out[r.id] = 0;
    }
    for (const auto& v : gt.visitors) {
        for (const auto& s : v.stays) {
            if (s.enter <= at && at < s.leave) {
                ++out[s.room];
            }
        }
    }
    return out;
}

std::optional<std::pair<RoomId, Timestamp>> truth_last_known(const GroundTruth& gt, const TagId& tag, Timestamp at)
{
    std::optional<std::pair<RoomId, Timestamp>> out;
    for (const auto& v : gt.visitors) {
        if (v.tag != tag || v.issued() > at) {
            continue;
        }
        for (const auto& s : v.stays) {
            if (s.enter <= at) {
                out = std::make_pair(s.room, s.enter);
            }
        }
    }
    return out;
}

IntervalFlow truth_flow(const GroundTruth& gt, const RoomId& room, Timestamp from, Timestamp to)
{
    IntervalFlow f{room, from, to, 0, 0};
    for (const auto& v : gt.visitors) {
        for (const auto& s : v.stays) {
            if (s.room != room) {
                continue;
            }
            f.entered += from < s.enter && s.enter <= to;
            f.left += from < s.leave && s.leave <= to;
        }
    }
    return f;
}

std::vector<Timestamp> event_times(const GroundTruth& gt)
{
    std::set<Timestamp> times;
    for (const auto& v : gt.visitors) {
        for (const auto& s : v.stays) {
            times.insert(s.enter);
            times.insert(s.leave);
        }
    }
    return {times.begin(), times.end()};
}

std::string render_truth(const GroundTruth& gt)
{
    std::string out;
    for (const auto& v : gt.visitors) {
        for (const auto& s : v.stays) {
            out += v.tag.str() + ' ' + s.room.str() + ' ' + s.enter.format() + ' ' + s.leave.format() + '\n';
        }
    }
    return out;
}

std::string render_trace(const std::vector<Passage>& passages)
{
    std::string out;
    for (const auto& p : passages) {
        out += p.tag.str() + ' ' + p.at.format() + '\n';
    }
    return out;
}

std::vector<Passage> parse_trace(std::string_view text)
{
    std::vector<Passage> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream fields(line);
        std::string tag, ts, extra;
        fields >> tag >> ts;
        if (tag.empty() || ts.empty() || (fields >> extra)) {
            bad("trace line " + std::to_string(lineno) + ": expected TAGID TIMESTAMP");
        }
        try {
            out.push_back(Passage{TagId::parse(tag), Timestamp::parse(ts)});
        }
        catch (const Error& e) {
            bad("trace line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

ScenarioParams parse_scenario(std::string_view text)
{
    ScenarioParams p;
    std::string plan;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream fields(line);
        std::string key, value, extra;
        fields >> key >> value;
        static const std::set<std::string> keys{"VISITORS", "ARRIVAL_MEAN", "DWELL_MEAN", "DWELL_MIN",
                                                "POLICY",   "DURATION",     "START",      "SEED"};
        if (!keys.count(key)) {
            plan += line;
            plan += '\n';
            continue;
        }
        plan += '\n'; // keeps floor-plan line numbers intact
        if (value.empty() || (fields >> extra)) {
            bad("scenario line " + std::to_string(lineno) + ": " + key + " takes one value");
        }
        try {
            std::size_t used = 0;
            auto whole = [&](auto v) {
                if (used != value.size()) {
                    throw std::invalid_argument("trailing characters");
                }
                return v;
            };
            if (key == "VISITORS") {
                p.n_visitors = whole(std::stoi(value, &used));
            }
            else if (key == "ARRIVAL_MEAN") {
                p.arrival_mean_s = whole(std::stod(value, &used));
            }
            else if (key == "DWELL_MEAN") {
                p.dwell_mean_s = whole(std::stod(value, &used));
            }
            else if (key == "DWELL_MIN") {
                p.dwell_min_s = whole(std::stoll(value, &used));
            }
            else if (key == "DURATION") {
                p.duration_s = whole(std::stoll(value, &used));
            }
            else if (key == "SEED") {
                p.seed = whole(std::stoull(value, &used));
            }
            else if (key == "POLICY") {
                p.policy = parse_visit_policy(value);
            }
            else {
                p.start = Timestamp::parse(value);
            }
        }
        catch (const Error& e) {
            bad("scenario line " + std::to_string(lineno) + ": " + e.what());
        }
        catch (const std::exception&) {
            bad("scenario line " + std::to_string(lineno) + ": bad value '" + value + "' for " + key);
        }
    }
    p.graph = std::make_shared<const BuildingGraph>(parse_floor_plan(plan));
    p.validate();
    return p;
}

ScenarioParams load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot read scenario " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string render_scenario(const ScenarioParams& p)
{
    std::ostringstream out;
    out << render_floor_plan(*p.graph);
    out << "VISITORS " << p.n_visitors << '\n';
    out << "ARRIVAL_MEAN " << p.arrival_mean_s << '\n';
    out << "DWELL_MEAN " << p.dwell_mean_s << '\n';
    out << "DWELL_MIN " << p.dwell_min_s << '\n';
    out << "POLICY " << to_string(p.policy) << '\n';
    out << "DURATION " << p.duration_s << '\n';
    out << "START " << p.start.format() << '\n';
    out << "SEED " << p.seed << '\n';
    return out.str();
}

} // namespace vtrack
