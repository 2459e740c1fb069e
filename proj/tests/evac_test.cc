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

#include "graph_corpus.h"
#include "test_support.h"
#include "vtrack/error.h"
#include "vtrack/evac.h"

#include <gtest/gtest.h>

namespace vtrack {
namespace {

using testing::TempDir;
using testing::t0;

RoomId room(const char* r) { return RoomId::parse(r); }

std::vector<RoomId> rooms(std::initializer_list<const char*> names)
{
    std::vector<RoomId> out;
    for (auto n : names) {
        out.push_back(room(n));
    }
    return out;
}

BuildingGraph linear()
{
    return BuildingGraph::Builder{}
        .room("A", 0)
        .room("B", 0)
        .room("exit", 0)
        .edge("A", "B")
        .edge("B", "exit")
        .exit("exit")
        .entrance("exit")
        .build();
}

TEST(NearestExitTest, ExitIsItsOwnRoute)
{
    auto r = nearest_exit(linear(), room("exit"));
    EXPECT_EQ(r.path, rooms({"exit"}));
    EXPECT_EQ(r.hops, 0);
}

TEST(NearestExitTest, LinearGraph)
{
    auto r = nearest_exit(linear(), room("A"));
    EXPECT_EQ(r.path, rooms({"A", "B", "exit"}));
    EXPECT_EQ(r.hops, 2);
    EXPECT_EQ(route_text(r), "A > B > exit");
}

TEST(NearestExitTest, TieBreaksOnSmallestNextRoom)
{
    auto g = BuildingGraph::Builder{}
                 .room("S", 0)
                 .room("m2", 0)
                 .room("m1", 0)
                 .room("out", 0)
                 .edge("S", "m2")
                 .edge("S", "m1")
                 .edge("m1", "out")
                 .edge("m2", "out")
                 .exit("out")
                 .entrance("out")
                 .build();
    EXPECT_EQ(nearest_exit(g, room("S")).path, rooms({"S", "m1", "out"}));
    EXPECT_THROW(nearest_exit(g, room("nope")), Error);
}

TEST(NearestExitTest, DefaultBuildingRoutesEndAtGroundExit)
{
    auto g = default_building();
    for (const auto& r : all_routes(g)) {
        ASSERT_FALSE(r.path.empty());
        EXPECT_EQ(r.path.back(), g.entrance());
        EXPECT_EQ(g.floor_of(r.path.back()), 0);
        EXPECT_EQ(r.hops + 1, static_cast<int>(r.path.size()));
        for (std::size_t i = 1; i < r.path.size(); ++i) {
            EXPECT_TRUE(g.adjacent(r.path[i - 1], r.path[i]));
        }
    }
    EXPECT_EQ(nearest_exit(g, room("venue")).hops, 1);
    EXPECT_EQ(nearest_exit(g, room("Room2")).hops, 2);
}

TEST(NearestExitTest, MatchesBruteForceOnRandomGraphs)
{
    int graphs = 0;
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
        auto g = testing::random_graph(seed, 1 + static_cast<int>(seed % 10));
        ++graphs;
        auto routes = all_routes(g);
        for (const auto& r : routes) {
            ASSERT_EQ(r.hops, testing::brute_force_hops(g, r.from)) << "seed " << seed << " room " << r.from.str();
            ASSERT_TRUE(g.is_exit(r.path.back()));
            ASSERT_EQ(r, nearest_exit(g, r.from));
        }
    }
    EXPECT_GE(graphs, 200);
}

OccupancySnapshot snapshot(const BuildingGraph& g, std::map<std::string, std::int64_t> counts)
{
    OccupancySnapshot s;
    s.at = t0();
    for (const auto& r : g.rooms()) {
        auto n = counts.count(r.id.str()) ? counts[r.id.str()] : 0;
        s.per_room.emplace_back(r.id, n);
        s.total += n;
    }
    return s;
}

TEST(EvacReportTest, ZeroSnapshotListsExitsOnly)
{
    auto g = default_building();
    auto rep = evac_report(g, snapshot(g, {}));
    EXPECT_EQ(rep.total_inside, 0);
    ASSERT_EQ(rep.per_room.size(), 1u);
    EXPECT_EQ(rep.per_room[0].room, g.entrance());
}

TEST(EvacReportTest, DescendingOccupancy)
{
    auto g = default_building();
    auto rep = evac_report(g, snapshot(g, {{"Room1", 3}, {"venue", 9}, {"Room3", 3}, {"control", 1}}));
    EXPECT_EQ(rep.total_inside, 16);
    std::vector<std::string> order;
    for (const auto& e : rep.per_room) {
        order.push_back(e.room.str());
    }
    EXPECT_EQ(order, (std::vector<std::string>{"venue", "Room1", "Room3", "control", "entrance"}));
    EXPECT_EQ(rep.per_room[0].route.path, rooms({"venue", "entrance"}));
}

TEST(EvacReportTest, UnknownRoomRejected)
{
    auto g = default_building();
    auto s = snapshot(g, {});
    s.per_room.emplace_back(room("Attic"), 1);
    try {
        evac_report(g, s);
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownRoomInSnapshot);
    }
}

EvacReport sample_report()
{
    auto g = default_building();
    return evac_report(g, snapshot(g, {{"Room2", 4}, {"venue", 2}}));
}

TEST(OutboxTest, OneEmailRecipient)
{
    TempDir dir;
    Outbox box(dir / "outbox.txt");
    auto res = box.trigger(sample_report(), {Channel::Email}, {"safety@example.org"}, t0());
    EXPECT_FALSE(res.coalesced);
    ASSERT_EQ(res.queued.size(), 1u);
    auto recs = box.records();
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0], res.queued[0]);
    EXPECT_NE(recs[0].body.find("6 inside"), std::string::npos);
    EXPECT_NE(recs[0].body.find("Room2 4"), std::string::npos);
    EXPECT_NE(recs[0].body.find("venue 2"), std::string::npos);
    std::ifstream in(dir / "outbox.txt");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("28-09-2017T11:00:00\temail\tsafety@example.org\tEVACUATION at ", 0), 0u);
}

TEST(OutboxTest, SecondTriggerWithinCooldownCoalesced)
{
    TempDir dir;
    Outbox box(dir / "outbox.txt");
    box.trigger(sample_report(), {Channel::Sms}, {"+30000"}, t0());
    auto again = box.trigger(sample_report(), {Channel::Sms}, {"+30000"}, t0() + 5);
    EXPECT_TRUE(again.coalesced);
    EXPECT_TRUE(again.queued.empty());
    EXPECT_EQ(box.records().size(), 1u);
    EXPECT_FALSE(box.trigger(sample_report(), {Channel::Sms}, {"+30000"}, t0() + 60).coalesced);
    EXPECT_EQ(box.size(), 2u);
}

TEST(OutboxTest, CooldownSurvivesReopen)
{
    TempDir dir;
    {
        Outbox box(dir / "outbox.txt");
        box.trigger(sample_report(), {Channel::Phone}, {"desk"}, t0());
    }
    Outbox box(dir / "outbox.txt");
    EXPECT_EQ(box.size(), 1u);
    EXPECT_TRUE(box.trigger(sample_report(), {Channel::Phone}, {"desk"}, t0() + 30).coalesced);
}

TEST(OutboxTest, CrossProduct)
{
    TempDir dir;
    Outbox box(dir / "outbox.txt");
    auto res = box.trigger(sample_report(), {Channel::Email, Channel::Sms, Channel::Phone}, {"a", "b"}, t0());
    EXPECT_EQ(res.queued.size(), 6u);
    EXPECT_EQ(box.records().size(), 6u);
}

TEST(OutboxTest, Errors)
{
    TempDir dir;
    Outbox box(dir / "outbox.txt");
    try {
        box.trigger(sample_report(), {}, {"a"}, t0());
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoChannels);
    }
    EXPECT_THROW(box.trigger(sample_report(), {Channel::Email}, {}, t0()), Error);
    EXPECT_THROW(box.trigger(sample_report(), {Channel::Email}, {"a\tb"}, t0()), Error);
    EXPECT_THROW(parse_channel("pigeon"), Error);
    EXPECT_EQ(box.size(), 0u);
}

} // namespace
} // namespace vtrack
