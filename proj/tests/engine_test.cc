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

#include "faulty_storage.h"
#include "test_support.h"
#include "vtrack/engine.h"
#include "vtrack/error.h"

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

namespace vtrack {
namespace {

using testing::TempDir;
using testing::t0;

ErrorCode code_of(const std::function<void()>& fn)
{
    try {
        fn();
    }
    catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidParams;
}

void add_checkpoints(Engine& e)
{
    for (const auto& c : e.snapshot()->graph().checkpoints()) {
        e.register_checkpoint(c.node, c.name, c.room, t0());
    }
}

StoreOptions store_in(const TempDir& dir)
{
    StoreOptions o;
    o.dir = dir.path();
    o.sync = false;
    return o;
}

wire::ReportPayload listing_payload(std::string* bytes)
{
    *bytes = testing::read_fixture("report_listing.txt");
    while (!bytes->empty() && bytes->back() == '\n') {
        bytes->pop_back();
    }
    return wire::decode_report_payload(*bytes);
}

TEST(EngineTest, ListingReportAppliesThreeThenRedeliveryIsNoop)
{
    Engine e(testing::default_graph(), {});
    add_checkpoints(e);
    std::string bytes;
    auto payload = listing_payload(&bytes);
    auto first = e.ingest_report(payload, bytes);
    EXPECT_FALSE(first.redelivered);
    EXPECT_EQ(first.records, 4u);
    EXPECT_EQ(first.applied, 3u);
    EXPECT_EQ(first.duplicates, 1u);
    EXPECT_EQ(first.batch_id.rfind("fnv-", 0), 0u);
    auto seq = e.last_seq();
    auto again = e.ingest_report(payload, bytes);
    EXPECT_TRUE(again.redelivered);
    EXPECT_EQ(again.batch_id, first.batch_id);
    EXPECT_EQ(e.last_seq(), seq);
    EXPECT_EQ(e.snapshot()->checkpoint(NodeId::parse("192.168.0.3"))->last_report, testing::ts("28-09-2017T11:08:17"));
}

TEST(EngineTest, UnknownReporterRejected)
{
    Engine e(testing::default_graph(), {});
    std::string bytes;
    auto payload = listing_payload(&bytes);
    EXPECT_EQ(code_of([&] { e.ingest_report(payload, bytes); }), ErrorCode::RejectedUnknownCheckpoint);
    EXPECT_EQ(code_of([&] { e.heartbeat({NodeId::parse("10.1.1.1"), t0()}); }), ErrorCode::RejectedUnknownCheckpoint);
    EXPECT_EQ(e.last_seq(), 0u);
}

TEST(EngineTest, TaggedReportMovesVisitors)
{
    Engine e(testing::default_graph(), {});
    add_checkpoints(e);
    e.register_visitor(TagId::parse("01008C7200"), "Visitor Name1", Demographic::Female, t0() + 1);
    wire::ReportPayload p;
    p.batch_id = "rp1-1";
    p.report.records.push_back({NodeId::parse("192.168.0.1"), "Rp1", RoomId::parse("Room1"), t0() + 10});
    p.tags = wire::TagRoster{{{TagId::parse("01008C7200"), "Visitor Name1"}}};
    auto r = e.ingest_report(p, wire::encode_report_payload(p));
    EXPECT_EQ(r.applied, 1u);
    EXPECT_EQ(r.batch_id, "rp1-1");
    auto lk = e.snapshot()->last_known(TagId::parse("01008C7200"));
    EXPECT_EQ(lk->first, RoomId::parse("Room1"));
}

TEST(EngineTest, PreconditionErrors)
{
    Engine e(testing::default_graph(), {});
    add_checkpoints(e);
    auto tag = TagId::parse("01008C7200");
    e.register_visitor(tag, "A", Demographic::Male, t0());
    EXPECT_EQ(code_of([&] { e.register_visitor(tag, "A", Demographic::Male, t0()); }), ErrorCode::TagAlreadyActive);
    e.return_tag(tag, t0() + 5);
    EXPECT_EQ(code_of([&] { e.return_tag(tag, t0() + 6); }), ErrorCode::TagNotActive);
    EXPECT_EQ(code_of([&] { e.register_checkpoint(NodeId::parse("192.168.0.1"), "X", RoomId::parse("Room1"), t0()); }),
              ErrorCode::DuplicateNode);
    EXPECT_EQ(code_of([&] { e.register_checkpoint(NodeId::parse("10.0.0.9"), "X", RoomId::parse("Attic"), t0()); }),
              ErrorCode::UnknownRoom);
    EXPECT_EQ(code_of([&] { e.register_visitor(TagId::parse("01008C7201"), "bad|name", Demographic::Male, t0()); }),
              ErrorCode::MalformedName);
    EXPECT_EQ(e.snapshot()->diagnostics().rejected_records, 0u);
}

TEST(EngineTest, RosterIsAllOrNothing)
{
    Engine e(testing::default_graph(), {});
    auto roster = wire::decode_tag_roster(testing::read_fixture("roster_listing.txt"));
    auto vs = e.register_roster(roster, t0());
    EXPECT_EQ(vs.size(), 3u);
    EXPECT_EQ(e.snapshot()->occupancy().total, 3);
    roster.entries.push_back({TagId::parse("01008C72AA"), "New"});
    EXPECT_EQ(code_of([&] { e.register_roster(roster, t0() + 1); }), ErrorCode::TagAlreadyActive);
    EXPECT_FALSE(e.snapshot()->visitor(TagId::parse("01008C72AA")));
}

TEST(EngineTest, RestartRestoresStateAndBatchRegistry)
{
    TempDir dir;
    std::string bytes;
    auto payload = listing_payload(&bytes);
    std::string before;
    {
        auto e = Engine::open(testing::default_graph(), {}, store_in(dir), 7);
        add_checkpoints(*e);
        for (int i = 0; i < 10; ++i) {
            char tag[11];
            std::snprintf(tag, sizeof tag, "00000000%02d", i);
            e->register_visitor(TagId::parse(tag), "V", Demographic::Unspecified, t0() + i);
        }
        e->ingest_report(payload, bytes);
        before = e->snapshot()->serialize();
    }
    auto e = Engine::open(testing::default_graph(), {}, store_in(dir), 7);
    EXPECT_TRUE(e->restore_warnings().empty());
    EXPECT_EQ(e->snapshot()->serialize(), before);
    EXPECT_FALSE(e->store()->snapshot_seqs().empty());
    EXPECT_TRUE(e->ingest_report(payload, bytes).redelivered);
}

TEST(EngineTest, StorageFailureHaltsIngest)
{
    TempDir dir;
    auto faulty = std::make_shared<testing::FaultyStorage>(6);
    auto e = Engine::open(testing::default_graph(), {}, store_in(dir), 0, faulty);
    add_checkpoints(*e);
    e->register_visitor(TagId::parse("0000000001"), "V", Demographic::Male, t0());
    auto seq = e->last_seq();
    EXPECT_EQ(code_of([&] { e->register_visitor(TagId::parse("0000000002"), "V", Demographic::Male, t0()); }),
              ErrorCode::IoFailure);
    EXPECT_TRUE(e->halted());
    EXPECT_EQ(e->last_seq(), seq);
    EXPECT_FALSE(e->snapshot()->visitor(TagId::parse("0000000002")));
    EXPECT_EQ(code_of([&] { e->return_tag(TagId::parse("0000000001"), t0()); }), ErrorCode::IoFailure);
    // Queries keep working.
    EXPECT_EQ(e->snapshot()->occupancy().total, 1);
}

TEST(EngineTest, QueriesRunDuringIngest)
{
    Engine e(testing::default_graph(), {});
    add_checkpoints(e);
    std::atomic<bool> done{false};
    std::atomic<int> bad{0};
    std::thread reader([&] {
        while (!done) {
            auto s = e.snapshot();
            auto snap = s->occupancy();
            std::int64_t sum = 0;
            for (const auto& [r, n] : snap.per_room) {
                sum += n;
            }
            if (sum != snap.total || static_cast<std::size_t>(snap.total) != s->active_visitors()) {
                ++bad;
            }
        }
    });
    for (int i = 0; i < 300; ++i) {
        char tag[11];
        std::snprintf(tag, sizeof tag, "%010d", i);
        e.register_visitor(TagId::parse(tag), "V", Demographic::Female, t0() + i);
        if (i % 3 == 0) {
            e.return_tag(TagId::parse(tag), t0() + i);
        }
    }
    done = true;
    reader.join();
    EXPECT_EQ(bad, 0);
    EXPECT_EQ(e.snapshot()->occupancy().total, 200);
}

} // namespace
} // namespace vtrack
