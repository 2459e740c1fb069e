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

#include "vtrack/live_run.h"

#include <gtest/gtest.h>

#include "oracle_run.h"
#include "test_support.h"

namespace vtrack {
namespace {

using testing::default_graph;
using testing::OracleRun;

ScenarioParams params(std::uint64_t seed, int visitors = 40)
{
    ScenarioParams p;
    p.graph = default_graph();
    p.n_visitors = visitors;
    p.seed = seed;
    return p;
}

DetectionModel certain()
{
    DetectionModel m;
    m.p_detect = 1.0;
    return m;
}

TEST(FeedTest, EmptyTruthLeavesEngineUnchanged)
{
    auto p = params(3, 0);
    OracleRun run(p, certain());
    EXPECT_EQ(run.stats.passages, 0u);
    EXPECT_EQ(run.engine->last_seq(), p.graph->checkpoints().size());
    EXPECT_EQ(run.engine->snapshot()->occupancy().total, 0);
}

TEST(FeedTest, MissingNodeRejected)
{
    auto gt = generate(params(4, 5));
    std::map<NodeId, ReaderNode*> none;
    EXPECT_THROW(feed(gt, none, Desk{}), Error);
    try {
        feed(gt, none, Desk{});
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingNode);
    }
}

TEST(FeedTest, CertainDetectionMatchesTruth)
{
    for (std::uint64_t seed : {1, 2}) {
        OracleRun run(params(seed), certain());
        EXPECT_TRUE(run.stats.drained);
        EXPECT_TRUE(run.live_violations.empty()) << run.live_violations.front();
        auto s = run.engine->snapshot();
        auto bad = oracle_violations(run.gt, *s);
        EXPECT_TRUE(bad.empty()) << "seed " << seed << ": " << bad.front();
        auto unbalanced = balance_violations(run.gt, *s);
        EXPECT_TRUE(unbalanced.empty()) << unbalanced.front();
        EXPECT_EQ(s->occupancy().total, 0);
        EXPECT_EQ(s->diagnostics().unknown_or_inactive_tag, 0u);
        EXPECT_GT(run.stats.passages, 100u);
        EXPECT_EQ(s->diagnostics().applied_reads, run.stats.passages);
    }
}

TEST(FeedTest, TourPolicyMatchesTruth)
{
    auto p = params(9, 15);
    p.policy = VisitPolicy::TourAllRooms;
    OracleRun run(p, certain());
    auto bad = oracle_violations(run.gt, *run.engine->snapshot());
    EXPECT_TRUE(bad.empty()) << bad.front();
}

TEST(FeedTest, MissedReadsNeverInventPlacements)
{
    DetectionModel lossy;
    lossy.p_detect = 0.9;
    for (std::uint64_t seed : {1, 2, 3}) {
        OracleRun full(params(seed), certain());
        OracleRun degraded(params(seed), lossy);
        auto a = full.engine->snapshot();
        auto b = degraded.engine->snapshot();
        EXPECT_LE(b->diagnostics().observed_transitions, a->diagnostics().observed_transitions);
        EXPECT_GT(b->diagnostics().observed_transitions, 0u);
        for (auto t : event_times(degraded.gt)) {
            std::int64_t truth_total = 0;
            for (const auto& [room, n] : truth_occupancy(degraded.gt, t)) {
                truth_total += n;
            }
            ASSERT_LE(b->occupancy(t).total, truth_total) << t.format();
        }
        auto truth_rooms = [&](const Trajectory& v) {
            std::set<RoomId> r;
            for (const auto& s : v.stays) {
                r.insert(s.room);
            }
            return r;
        };
        auto placed = engine_rooms(degraded.gt, *b);
        for (const auto& v : degraded.gt.visitors) {
            auto truth = truth_rooms(v);
            for (const auto& room : placed[v.tag]) {
                EXPECT_TRUE(truth.count(room)) << v.tag.str() << " placed in " << room.str();
            }
        }
    }
}

TEST(FeedTest, SpeedPacesTheClock)
{
    auto p = params(5, 1);
    p.duration_s = 60;
    auto gt = generate(p);
    auto span = gt.visitors.front().returned() - gt.visitors.front().issued();
    FeedOptions opts;
    opts.speed = double(span) * 10; // whole visit in about 0.1 s
    auto start = std::chrono::steady_clock::now();
    std::map<NodeId, ReaderNode*> none;
    GroundTruth no_passages = gt;
    no_passages.passages.clear();
    auto stats = feed(no_passages, none, Desk{}, opts);
    auto elapsed = std::chrono::steady_clock::now() - start;
    EXPECT_EQ(stats.issued, 1u);
    EXPECT_GE(elapsed, std::chrono::milliseconds(90));
    EXPECT_LT(elapsed, std::chrono::seconds(3));
}

} // namespace
} // namespace vtrack
