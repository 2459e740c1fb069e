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

#include "vtrack/building_graph.h"

#include "vtrack/error.h"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

namespace vtrack {

namespace {

constexpr std::string_view kDefaultFloorPlan = R"(# Two studied floors of the house.
# The edges approximate the evacuation drawings of both floors; the drawings
# are not machine-readable, so this adjacency is a modeling choice.

# ground floor
ROOM entrance 0
ROOM Room1 0
ROOM Room2 0
ROOM Room3 0
ROOM control 0
# first floor
ROOM venue 1

ENTRANCE entrance
EXIT entrance

EDGE entrance Room1
EDGE Room1 Room2
EDGE Room2 Room3
EDGE Room3 entrance
# control room: not public, no reader
EDGE entrance control
# stairways
EDGE entrance venue
EDGE Room3 venue

CHECKPOINT 192.168.0.1 Rp1 Room1
CHECKPOINT 192.168.0.2 Rp2 Room2
CHECKPOINT 192.168.0.3 Rp3 Room3
CHECKPOINT 192.168.0.4 Rp4 venue
)";

[[noreturn]] void invalid(const std::string& rule)
{
    throw Error(ErrorCode::InvalidGraph, rule);
}

std::vector<std::string_view> split_tokens(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
            ++i;
        }
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
            ++i;
        }
        if (i > start) {
            out.push_back(line.substr(start, i - start));
        }
    }
    return out;
}

} // namespace

BuildingGraph::Builder& BuildingGraph::Builder::room(std::string_view id, int floor)
{
    rooms_.push_back({RoomId::parse(id), floor});
    return *this;
}

BuildingGraph::Builder& BuildingGraph::Builder::edge(std::string_view a, std::string_view b)
{
    edges_.emplace_back(RoomId::parse(a), RoomId::parse(b));
    return *this;
}

BuildingGraph::Builder& BuildingGraph::Builder::exit(std::string_view id)
{
    exits_.push_back(RoomId::parse(id));
    return *this;
}

BuildingGraph::Builder& BuildingGraph::Builder::entrance(std::string_view id)
{
    entrance_ = RoomId::parse(id);
    return *this;
}

BuildingGraph::Builder& BuildingGraph::Builder::checkpoint(std::string_view node, std::string_view name,
                                                           std::string_view room)
{
    checkpoints_.push_back({NodeId::parse(node), validate_name(name), RoomId::parse(room)});
    return *this;
}

BuildingGraph BuildingGraph::Builder::build() const
{
    if (rooms_.empty()) {
        invalid("graph has no rooms");
    }
    if (!entrance_) {
        invalid("no entrance declared");
    }
    BuildingGraph g(rooms_, *entrance_);
    for (std::size_t i = 0; i < g.rooms_.size(); ++i) {
        if (!g.index_.emplace(g.rooms_[i].id, i).second) {
            invalid("duplicate room '" + g.rooms_[i].id.str() + "'");
        }
    }
    g.adjacency_.resize(g.rooms_.size());

    std::set<std::pair<RoomId, RoomId>> seen;
    for (const auto& [a, b] : edges_) {
        if (!g.has_room(a) || !g.has_room(b)) {
            invalid("edge " + a.str() + "-" + b.str() + " names an unknown room");
        }
        if (a == b) {
            invalid("self-loop edge at '" + a.str() + "'");
        }
        auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        if (!seen.insert(key).second) {
            continue;
        }
        g.edges_.push_back(key);
        g.adjacency_[g.index_of(a)].push_back(b);
        g.adjacency_[g.index_of(b)].push_back(a);
    }
    std::sort(g.edges_.begin(), g.edges_.end());
    for (auto& n : g.adjacency_) {
        std::sort(n.begin(), n.end());
    }

    for (const auto& e : exits_) {
        if (!g.has_room(e)) {
            invalid("exit '" + e.str() + "' is not a room");
        }
        g.exits_.insert(e);
    }
    if (!g.has_room(g.entrance_)) {
        invalid("entrance '" + g.entrance_.str() + "' is not a room");
    }
    if (!g.is_exit(g.entrance_)) {
        invalid("entrance '" + g.entrance_.str() + "' is not an exit");
    }

    std::set<NodeId> nodes;
    for (const auto& c : checkpoints_) {
        if (!g.has_room(c.room)) {
            invalid("checkpoint " + c.node.str() + " location '" + c.room.str() + "' is not a room");
        }
        if (!nodes.insert(c.node).second) {
            invalid("checkpoint " + c.node.str() + " placed more than once");
        }
        g.checkpoints_.push_back(c);
    }

    std::vector<bool> reached(g.rooms_.size(), false);
    std::queue<std::size_t> q;
    q.push(0);
    reached[0] = true;
    std::size_t count = 1;
    while (!q.empty()) {
        std::size_t u = q.front();
        q.pop();
        for (const auto& v : g.adjacency_[u]) {
            std::size_t vi = g.index_of(v);
            if (!reached[vi]) {
                reached[vi] = true;
                ++count;
                q.push(vi);
            }
        }
    }
    if (count != g.rooms_.size()) {
        invalid("graph is not connected");
    }
    return g;
}

std::size_t BuildingGraph::index_of(const RoomId& id) const
{
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw Error(ErrorCode::UnknownRoom, "room '" + id.str() + "' is not in the building graph");
    }
    return it->second;
}

int BuildingGraph::floor_of(const RoomId& id) const { return rooms_[index_of(id)].floor; }

const std::vector<RoomId>& BuildingGraph::neighbors(const RoomId& id) const
{
    return adjacency_[index_of(id)];
}

bool BuildingGraph::adjacent(const RoomId& a, const RoomId& b) const
{
    const auto& n = neighbors(a);
    return std::binary_search(n.begin(), n.end(), b);
}

std::optional<RoomId> BuildingGraph::room_of(const NodeId& node) const
{
    for (const auto& c : checkpoints_) {
        if (c.node == node) {
            return c.room;
        }
    }
    return std::nullopt;
}

bool BuildingGraph::operator==(const BuildingGraph& other) const
{
    return rooms_ == other.rooms_ && edges_ == other.edges_ && exits_ == other.exits_
           && entrance_ == other.entrance_ && checkpoints_ == other.checkpoints_;
}

BuildingGraph parse_floor_plan(std::string_view text)
{
    BuildingGraph::Builder b;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        auto tok = split_tokens(line);
        if (tok.empty()) {
            continue;
        }
        auto arity = [&](std::size_t n) {
            if (tok.size() != n + 1) {
                invalid("line " + std::to_string(line_no) + ": " + std::string(tok[0]) + " takes "
                        + std::to_string(n) + " argument(s)");
            }
        };
        try {
            if (tok[0] == "ROOM") {
                arity(2);
                int floor = 0;
                try {
                    std::size_t used = 0;
                    floor = std::stoi(std::string(tok[2]), &used);
                    if (used != tok[2].size()) {
                        throw std::invalid_argument("trailing");
                    }
                }
                catch (const std::logic_error&) {
                    invalid("line " + std::to_string(line_no) + ": floor must be an integer");
                }
                b.room(tok[1], floor);
            }
            else if (tok[0] == "EDGE") {
                arity(2);
                b.edge(tok[1], tok[2]);
            }
            else if (tok[0] == "EXIT") {
                arity(1);
                b.exit(tok[1]);
            }
            else if (tok[0] == "ENTRANCE") {
                arity(1);
                b.entrance(tok[1]);
            }
            else if (tok[0] == "CHECKPOINT") {
                arity(3);
                b.checkpoint(tok[1], tok[2], tok[3]);
            }
            else {
                invalid("line " + std::to_string(line_no) + ": unknown directive '" + std::string(tok[0]) + "'");
            }
        }
        catch (const Error& e) {
            if (e.code() == ErrorCode::InvalidGraph) {
                throw;
            }
            invalid("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return b.build();
}

BuildingGraph load_floor_plan(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open floor plan '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_floor_plan(ss.str());
}

std::string render_floor_plan(const BuildingGraph& g)
{
    std::ostringstream out;
    for (const auto& r : g.rooms()) {
        out << "ROOM " << r.id.str() << ' ' << r.floor << '\n';
    }
    out << "ENTRANCE " << g.entrance().str() << '\n';
    for (const auto& e : g.exits()) {
        out << "EXIT " << e.str() << '\n';
    }
    for (const auto& [a, b] : g.edges()) {
        out << "EDGE " << a.str() << ' ' << b.str() << '\n';
    }
    for (const auto& c : g.checkpoints()) {
        out << "CHECKPOINT " << c.node.str() << ' ' << c.name << ' ' << c.room.str() << '\n';
    }
    return out.str();
}

std::string_view default_floor_plan_text() { return kDefaultFloorPlan; }

BuildingGraph default_building() { return parse_floor_plan(kDefaultFloorPlan); }

} // namespace vtrack
