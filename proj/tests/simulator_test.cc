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

#include "test_support.h"
#include "vtrack/error.h"
#include "vtrack/simulator.h"

#include <gtest/gtest.h>

namespace vtrack {
namespace {

ScenarioParams defaults(int visitors, std::uint64_t seed = 1)
{
    ScenarioParams p;
    p.graph = testing::default_graph();
    p.n_visitors = visitors;
    p.seed = seed;
    return p;
}

TEST(SimulatorTest, NoVisitorsNoTruth)
{
    auto gt = generate(defaults(0));
    EXPECT_TRUE(gt.visitors.empty());
    for (const auto& [node, ps] : gt.passages) {
        EXPECT_TRUE(ps.empty());
    }
    EXPECT_TRUE(event_times(gt).empty());
}

TEST(SimulatorTest, TourVisitsEachPublicRoomOnce)
{
    auto p = defaults(1);
    p.policy = VisitPolicy::TourAllRooms;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        p.seed = seed;
        auto gt = generate(p);
        ASSERT_EQ(gt.visitors.size(), 1u);
        std::vector<std::string> rooms;
        for (const auto& s : gt.visitors[0].stays) {
            rooms.push_back(s.room.str());
        }
        EXPECT_EQ(rooms, (std::vector<std::string>{"entrance", "Room1", "Room2", "Room3", "venue", "entrance"}));
    }
}

TEST(SimulatorTest, SameSeedSameBytes)
{
    auto a = generate(defaults(100, 7));
    auto b = generate(defaults(100, 7));
    EXPECT_EQ(render_truth(a), render_truth(b));
    EXPECT_EQ(a.passages, b.passages);
    EXPECT_NE(render_truth(a), render_truth(generate(defaults(100, 8))));
}

TEST(SimulatorTest, TrajectoryInvariants)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto gt = generate(defaults(100, seed));
        const auto& g = *gt.graph;
        std::map<NodeId, std::vector<Passage>> expected;
        for (const auto& c : g.checkpoints()) {
            expected[c.node];
        }
        for (const auto& v : gt.visitors) {
            ASSERT_FALSE(v.stays.empty());
            EXPECT_EQ(v.stays.front().room, g.entrance());
            EXPECT_EQ(v.stays.back().room, g.entrance());
            for (std::size_t i = 0; i < v.stays.size(); ++i) {
                const auto& s = v.stays[i];
                EXPECT_LE(s.enter, s.leave);
                if (i > 0) {
                    EXPECT_EQ(v.stays[i - 1].leave, s.enter);
                    EXPECT_TRUE(g.adjacent(v.stays[i - 1].room, s.room));
                    if (i + 1 < v.stays.size()) {
                        EXPECT_NE(s.room, g.entrance()) << "entrance only at the ends";
                        EXPECT_GE(s.leave - s.enter, 10);
                    }
                    else {
                        EXPECT_EQ(s.leave, s.enter) << "tag handed in on arrival at the desk";
                    }
                }
                if (i > 0 && s.room != g.entrance()) {
                    for (const auto& c : g.checkpoints()) {
                        if (c.room == s.room) {
                            expected[c.node].push_back(Passage{v.tag, s.enter});
                            break;
                        }
                    }
                }
            }
        }
        for (auto& [node, list] : expected) {
            std::stable_sort(list.begin(), list.end(), [](const Passage& a, const Passage& b) { return a.at < b.at; });
        }
        EXPECT_EQ(expected, gt.passages);
    }
}

TEST(SimulatorTest, TruthOccupancy)
{
    auto gt = generate(defaults(30, 3));
    auto first = gt.visitors.front().issued();
    for (const auto& [room, n] : truth_occupancy(gt, first - 1)) {
        EXPECT_EQ(n, 0);
    }
    // Single visitor mid-dwell in Room2.
    GroundTruth one{testing::default_graph(), {}, {}};
    Trajectory v{TagId::parse("01008C7200"), "V", Demographic::Male, {}};
    auto t = testing::t0();
    v.stays = {{RoomId::parse("entrance"), t, t + 20}, {RoomId::parse("Room1"), t + 20, t + 60},
               {RoomId::parse("Room2"), t + 60, t + 120}, {RoomId::parse("Room1"), t + 120, t + 150},
               {RoomId::parse("entrance"), t + 150, t + 150}};
    one.visitors.push_back(v);
    auto occ = truth_occupancy(one, t + 90);
    EXPECT_EQ(occ[RoomId::parse("Room2")], 1);
    std::int64_t total = 0;
    for (const auto& [room, n] : occ) {
        total += n;
    }
    EXPECT_EQ(total, 1);
    EXPECT_EQ(truth_occupancy(one, t + 150)[RoomId::parse("entrance")], 0);
    EXPECT_EQ(truth_last_known(one, v.tag, t + 90)->first, RoomId::parse("Room2"));
    EXPECT_EQ(truth_last_known(one, v.tag, t + 200)->second, t + 150);
    EXPECT_FALSE(truth_last_known(one, v.tag, t - 1));
    auto f = truth_flow(one, RoomId::parse("Room1"), t, t + 200);
    EXPECT_EQ(f.entered, 2);
    EXPECT_EQ(f.left, 2);
}

TEST(SimulatorTest, InvalidParams)
{
    auto p = defaults(-1);
    EXPECT_THROW(generate(p), Error);
    p = defaults(5);
    p.dwell_mean_s = 0;
    EXPECT_THROW(generate(p), Error);
    p = defaults(5);
    p.graph = nullptr;
    EXPECT_THROW(generate(p), Error);
}

TEST(ScenarioTest, ParsesAndRenders)
{
    auto p = parse_scenario(std::string(default_floor_plan_text())
                            + "VISITORS 12\nPOLICY tour_all_rooms\nSEED 9\nDURATION 600\nSTART 28-09-2017T10:00:00\n");
    EXPECT_EQ(p.n_visitors, 12);
    EXPECT_EQ(p.policy, VisitPolicy::TourAllRooms);
    EXPECT_EQ(p.seed, 9u);
    EXPECT_EQ(*p.graph, default_building());
    auto again = parse_scenario(render_scenario(p));
    EXPECT_EQ(render_truth(generate(again)), render_truth(generate(p)));
    EXPECT_THROW(parse_scenario(std::string(default_floor_plan_text()) + "VISITORS many\n"), Error);
    EXPECT_THROW(parse_scenario(std::string(default_floor_plan_text()) + "POLICY teleport\n"), Error);
}

TEST(ScenarioTest, ShippedScenariosLoad)
{
    for (const char* name : {"default", "envelope", "tour"}) {
        auto p = load_scenario(std::string(VTRACK_FIXTURES) + "/../../scenarios/" + name + ".scenario");
        EXPECT_EQ(*p.graph, default_building()) << name;
    }
}

TEST(TraceTest, RoundTrip)
{
    auto gt = generate(defaults(40, 2));
    for (const auto& [node, ps] : gt.passages) {
        EXPECT_EQ(parse_trace(render_trace(ps)), ps);
    }
    EXPECT_THROW(parse_trace("01008C7200\n"), Error);
    EXPECT_THROW(parse_trace("01008C7200 28-09-2017T10:00:00 extra\n"), Error);
}

} // namespace
} // namespace vtrack
