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

#include <gtest/gtest.h>

#include "oracle_run.h"
#include "test_support.h"

#include <thread>

namespace vtrack {
namespace {

using testing::t0;

struct Served {
    std::shared_ptr<Engine> engine = std::make_shared<Engine>(testing::default_graph(), EngineConfig{});
    std::shared_ptr<Gateway> gw =
        std::make_shared<Gateway>(engine, nullptr, testing::kCredentials, [] { return t0(); });
    HttpServer http{gw, Endpoint{"127.0.0.1", 0}};
    IngestServer ingest{gw, Endpoint{"127.0.0.1", 0}};

    Served()
    {
        http.start();
        ingest.start();
        for (const auto& c : engine->snapshot()->graph().checkpoints()) {
            engine->register_checkpoint(c.node, c.name, c.room, t0() - 60);
        }
    }
    Endpoint http_ep() const { return {"127.0.0.1", http.port()}; }
    Endpoint ingest_ep() const { return {"127.0.0.1", ingest.port()}; }
};

TEST(EndpointTest, Parses)
{
    auto e = Endpoint::parse("gateway.local:8080");
    EXPECT_EQ(e.host, "gateway.local");
    EXPECT_EQ(e.port, 8080);
    EXPECT_EQ(Endpoint::parse(":9").host, "127.0.0.1");
    EXPECT_THROW(Endpoint::parse("nohost"), Error);
    EXPECT_THROW(Endpoint::parse("h:99999"), Error);
    EXPECT_THROW(Endpoint::parse("h:x"), Error);
}

TEST(NetTest, ApiOverHttp)
{
    Served s;
    ApiClient manager(s.http_ep(), testing::kCredentials.manager_token);
    ApiClient viewer(s.http_ep(), testing::kCredentials.viewer_token);
    auto r = manager.post("/v1/visitors", "tag: 01008C7200\nname: Visitor Name1\ndemographic: male\n");
    EXPECT_EQ(r.status, 201) << r.body;
    auto occ = viewer.get("/v1/occupancy");
    EXPECT_EQ(occ.status, 200);
    EXPECT_EQ(TextDoc::parse(occ.body).get("total"), "1");
    EXPECT_EQ(viewer.post("/v1/visitors", "tag: 01008C7201\nname: X\n").status, 403);
    auto flow = viewer.get("/v1/rooms/entrance/flow", {{"from", "28-09-2017T10:00:00"}, {"to", "28-09-2017T12:00:00"}});
    EXPECT_EQ(flow.status, 200) << flow.body;
    EXPECT_EQ(TextDoc::parse(flow.body).get("entered"), "1");
    auto nowhere = viewer.get("/elsewhere");
    EXPECT_EQ(nowhere.status, 404);
    EXPECT_EQ(TextDoc::parse(nowhere.body).get("error"), "NotFound");
}

TEST(NetTest, UnreachableGatewayIsAnIoError)
{
    ApiClient c(Endpoint{"127.0.0.1", 1}, "x", 500);
    try {
        c.get("/v1/health");
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoFailure);
    }
}

void drive(ReaderNode& node, Timestamp from, Timestamp to)
{
    for (auto t = from; t <= to; t = t + 1) {
        node.tick(t);
    }
}

ReaderConfig reader_config()
{
    ReaderConfig c;
    c.node = NodeId::parse("192.168.0.1");
    c.name = "Rp1";
    c.room = RoomId::parse("Room1");
    c.model.p_detect = 1;
    c.model.dup_max = 0;
    return c;
}

TEST(NetTest, ReaderOverTcpAndHttp)
{
    Served s;
    s.engine->register_visitor(TagId::parse("01008C7200"), "A", Demographic::Female, t0());
    s.engine->register_visitor(TagId::parse("01008C7201"), "B", Demographic::Male, t0());

    ReaderNode tcp(reader_config(), std::make_shared<TcpLink>(s.ingest_ep()));
    auto c2 = reader_config();
    c2.node = NodeId::parse("192.168.0.2");
    c2.name = "Rp2";
    c2.room = RoomId::parse("Room2");
    ReaderNode http(c2, std::make_shared<HttpLink>(s.http_ep()));

    tcp.tick(t0());
    http.tick(t0());
    tcp.passage(TagId::parse("01008C7200"), t0() + 1);
    http.passage(TagId::parse("01008C7201"), t0() + 2);
    for (auto t = t0(); t <= t0() + 25; t = t + 1) {
        tcp.tick(t);
        http.tick(t);
    }
    EXPECT_TRUE(tcp.idle());
    EXPECT_TRUE(http.idle());
    EXPECT_EQ(tcp.stats().heartbeats_sent, 2u);
    auto snap = s.engine->snapshot();
    EXPECT_EQ(snap->last_known(TagId::parse("01008C7200"))->first.str(), "Room1");
    EXPECT_EQ(snap->last_known(TagId::parse("01008C7201"))->first.str(), "Room2");
    EXPECT_GE(s.ingest.frames_handled(), 3u);
}

TEST(NetTest, UnregisteredNodeHaltsOverTcp)
{
    Served s;
    auto c = reader_config();
    c.node = NodeId::parse("10.0.0.99");
    ReaderNode node(c, std::make_shared<TcpLink>(s.ingest_ep()));
    node.tick(t0());
    node.passage(TagId::parse("01008C7200"), t0());
    drive(node, t0(), t0() + 10);
    EXPECT_TRUE(node.halted());
    EXPECT_NE(node.halt_reason().find("RejectedUnknownCheckpoint"), std::string::npos);
}

TEST(NetTest, GatewayDownThenUpDeliversOnce)
{
    // Reserve a port, then release it so nothing listens there yet.
    auto engine = std::make_shared<Engine>(testing::default_graph(), EngineConfig{});
    for (const auto& c : engine->snapshot()->graph().checkpoints()) {
        engine->register_checkpoint(c.node, c.name, c.room, t0() - 60);
    }
    engine->register_visitor(TagId::parse("01008C7200"), "A", Demographic::Female, t0());
    auto gw = std::make_shared<Gateway>(engine, nullptr, testing::kCredentials, [] { return t0(); });
    int port = 0;
    {
        IngestServer probe(gw, Endpoint{"127.0.0.1", 0});
        probe.start();
        port = probe.port();
    }
    ReaderNode node(reader_config(), std::make_shared<TcpLink>(Endpoint{"127.0.0.1", port}, 1000));
    node.tick(t0());
    node.passage(TagId::parse("01008C7200"), t0());
    drive(node, t0(), t0() + 7); // attempts at +5 and +6 fail
    EXPECT_EQ(node.stats().retries, 2u);
    IngestServer late(gw, Endpoint{"127.0.0.1", port});
    late.start();
    drive(node, t0() + 8, t0() + 20);
    EXPECT_TRUE(node.idle());
    EXPECT_EQ(node.stats().retries, 2u);
    EXPECT_EQ(node.stats().acked, 1u);
    EXPECT_EQ(engine->snapshot()->diagnostics().applied_reads, 1u);
}

TEST(NetTest, ServerRestartIsSurvivedByReconnect)
{
    auto engine = std::make_shared<Engine>(testing::default_graph(), EngineConfig{});
    for (const auto& c : engine->snapshot()->graph().checkpoints()) {
        engine->register_checkpoint(c.node, c.name, c.room, t0() - 60);
    }
    auto gw = std::make_shared<Gateway>(engine, nullptr, testing::kCredentials, [] { return t0(); });
    auto first = std::make_unique<IngestServer>(gw, Endpoint{"127.0.0.1", 0});
    first->start();
    int port = first->port();
    auto link = std::make_shared<TcpLink>(Endpoint{"127.0.0.1", port}, 1000);
    auto hb = wire::frame_message(wire::FrameKind::Heartbeat, "192.168.0.1 28-09-2017T11:00:05");
    EXPECT_EQ(link->send(hb).kind, wire::Reply::Kind::Ok);
    first.reset();
    EXPECT_EQ(link->send(hb).kind, wire::Reply::Kind::Unavailable);
    IngestServer second(gw, Endpoint{"127.0.0.1", port});
    second.start();
    EXPECT_EQ(link->send(hb).kind, wire::Reply::Kind::Ok);
}

TEST(NetTest, ManyConcurrentReadersAndQueries)
{
    Served s;
    const int kVisitors = 40;
    for (int i = 0; i < kVisitors; ++i) {
        char tag[11];
        std::snprintf(tag, sizeof tag, "00000000%02d", i);
        s.engine->register_visitor(TagId::parse(tag), "V", Demographic::Unspecified, t0());
    }
    std::atomic<bool> done{false};
    std::atomic<int> queries{0};
    std::thread poller([&] {
        ApiClient viewer(s.http_ep(), testing::kCredentials.viewer_token);
        while (!done) {
            auto r = viewer.get("/v1/occupancy");
            EXPECT_EQ(r.status, 200);
            auto total = TextDoc::parse(r.body).get("total");
            EXPECT_EQ(total, std::to_string(kVisitors));
            ++queries;
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
    });
    std::vector<std::thread> readers;
    const auto& cps = s.engine->snapshot()->graph().checkpoints();
    for (std::size_t k = 0; k < cps.size(); ++k) {
        readers.emplace_back([&, k] {
            auto c = reader_config();
            c.node = cps[k].node;
            c.name = cps[k].name;
            c.room = cps[k].room;
            std::shared_ptr<GatewayLink> link;
            if (k % 2) {
                link = std::make_shared<TcpLink>(s.ingest_ep());
            }
            else {
                link = std::make_shared<HttpLink>(s.http_ep());
            }
            ReaderNode node(c, link);
            node.tick(t0());
            // Each visitor is seen by one node only, so arrival order across
            // nodes cannot make a read stale.
            for (int i = static_cast<int>(k); i < kVisitors; i += static_cast<int>(cps.size())) {
                char tag[11];
                std::snprintf(tag, sizeof tag, "00000000%02d", i);
                node.passage(TagId::parse(tag), t0() + i * 3);
            }
            drive(node, t0(), t0() + 200);
            EXPECT_TRUE(node.idle());
        });
    }
    for (auto& t : readers) {
        t.join();
    }
    done = true;
    poller.join();
    EXPECT_GT(queries.load(), 0);
    EXPECT_EQ(s.engine->snapshot()->diagnostics().applied_reads, static_cast<std::uint64_t>(kVisitors));
    EXPECT_EQ(s.engine->snapshot()->diagnostics().stale_reads, 0u);
    EXPECT_EQ(s.engine->snapshot()->occupancy().total, kVisitors);
}

} // namespace
} // namespace vtrack
