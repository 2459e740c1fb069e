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

#include "vtrack/error.h"
#include "vtrack/wire.h"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

namespace vtrack::wire {
namespace {

std::string read_fixture(const std::string& name)
{
    std::ifstream in(std::string(VTRACK_FIXTURES) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ReportRecord record(const char* node, const char* name, const char* room, const char* ts)
{
    return {NodeId::parse(node), name, RoomId::parse(room), Timestamp::parse(ts)};
}

TEST(RosterCodecTest, EncodesListingForm)
{
    TagRoster r{{{TagId::parse("01008C7200"), "Visitor Name1"}, {TagId::parse("01008C7201"), "Visitor Name2"}}};
    EXPECT_EQ(encode_tag_roster(r),
              "<TagId | Name>=<01008C7200 | Visitor Name1, 01008C7201 | Visitor Name2>");
}

TEST(RosterCodecTest, EmptyRoster)
{
    EXPECT_EQ(encode_tag_roster({}), "<TagId | Name>=<>");
    EXPECT_TRUE(decode_tag_roster("<TagId | Name>=<>").entries.empty());
}

TEST(RosterCodecTest, DecodesListingFixture)
{
    auto r = decode_tag_roster(read_fixture("roster_listing.txt"));
    ASSERT_EQ(r.entries.size(), 3u);
    EXPECT_EQ(r.entries[0].tag.str(), "01008C7200");
    EXPECT_EQ(r.entries[0].name, "Visitor Name1");
    EXPECT_EQ(r.entries[2].tag.str(), "01008C7202");
    EXPECT_EQ(r.entries[2].name, "Visitor Name3");
}

TEST(RosterCodecTest, ToleratesSpacingAndCase)
{
    auto r = decode_tag_roster(" < TagId|Name > = <\n01008c7200|Visitor Name1 ,01008C7201  |  Ann >\n");
    ASSERT_EQ(r.entries.size(), 2u);
    EXPECT_EQ(r.entries[0].tag.str(), "01008C7200");
    EXPECT_EQ(r.entries[1].name, "Ann");
}

TEST(RosterCodecTest, GrammarErrorsCarryPosition)
{
    try {
        decode_tag_roster("<TagId | Name>=<0100 | Ann>");
        FAIL();
    }
    catch (const GrammarError& e) {
        EXPECT_EQ(e.position(), 16u);
        EXPECT_EQ(e.code(), ErrorCode::GrammarError);
    }
    EXPECT_THROW(decode_tag_roster("<TagId | Name>=<01008C7200 | Ann"), GrammarError);
    EXPECT_THROW(decode_tag_roster("<TagId | Nome>=<>"), GrammarError);
    EXPECT_THROW(decode_tag_roster("<TagId | Name>=<> trailing"), GrammarError);
    EXPECT_THROW(decode_tag_roster("<TagId | Name>=<01008C7200 | Ann | Bob>"), GrammarError);
    EXPECT_THROW(decode_tag_roster("<TagId | Name>=<01008C7200 | >"), GrammarError);
    EXPECT_THROW(decode_tag_roster("<TagId | Name>=<01008C7200 | Ann, >"), GrammarError);
}

TEST(ReportCodecTest, SingleRecordMatchesListingLine)
{
    CheckpointReport c{{record("192.168.0.1", "Rp1", "Room1", "28-09-2017T11:08:15")}};
    EXPECT_EQ(encode_checkpoint_report(c),
              "<IpAdress | Name | Location | LastMeasurementTime>=<192.168.0.1| Rp1 | Room1 |28-09-2017T11:08:15>");
}

TEST(ReportCodecTest, DecodesListingFixtureWithDuplicate)
{
    auto c = decode_checkpoint_report(read_fixture("report_listing.txt"));
    ASSERT_EQ(c.records.size(), 4u);
    EXPECT_EQ(c.records[0], record("192.168.0.1", "Rp1", "Room1", "28-09-2017T11:08:15"));
    EXPECT_EQ(c.records[1].location.str(), "Room2");
    EXPECT_EQ(c.records[2], c.records[3]);
    EXPECT_EQ(encode_checkpoint_report(c),
              "<IpAdress | Name | Location | LastMeasurementTime>=<"
              "192.168.0.1| Rp1 | Room1 |28-09-2017T11:08:15 , "
              "192.168.0.2| Rp2 | Room2 |28-09-2017T11:08:16 , "
              "192.168.0.3| Rp3 | Room3 |28-09-2017T11:08:17 , "
              "192.168.0.3| Rp3 | Room3 |28-09-2017T11:08:17>");
}

TEST(ReportCodecTest, FieldErrorsNameRecordAndField)
{
    try {
        decode_checkpoint_report("<IpAdress | Name | Location | LastMeasurementTime>=<"
                                 "192.168.0.1| Rp1 | Room1 |28-09-2017T11:08:15 , "
                                 "192.168.0.2| Rp2 | Room2 |31-02-2017T11:08:16>");
        FAIL();
    }
    catch (const FieldError& e) {
        EXPECT_EQ(e.record_index(), 1u);
        EXPECT_EQ(e.field(), "time");
    }
    try {
        decode_checkpoint_report("<IpAdress | Name | Location | LastMeasurementTime>=<"
                                 "192.168.0.300| Rp1 | Room1 |28-09-2017T11:08:15>");
        FAIL();
    }
    catch (const FieldError& e) {
        EXPECT_EQ(e.record_index(), 0u);
        EXPECT_EQ(e.field(), "node");
    }
    EXPECT_THROW(decode_checkpoint_report("<IpAddress | Name | Location | LastMeasurementTime>=<>"), GrammarError);
    EXPECT_THROW(decode_checkpoint_report("<IpAdress | Name | Location | LastMeasurementTime>=<"
                                          "192.168.0.1| Rp1 | Room1>"),
                 GrammarError);
}

TEST(FrameTest, RoundTrip)
{
    std::string payload = encode_checkpoint_report({{record("192.168.0.1", "Rp1", "Room1", "28-09-2017T11:08:15")}});
    auto bytes = frame_message(FrameKind::Report, payload);
    EXPECT_EQ(bytes, "report\n" + payload + "\n\n");
    auto f = unframe(bytes);
    EXPECT_EQ(f.kind, FrameKind::Report);
    EXPECT_EQ(f.payload, payload);
}

TEST(FrameTest, EmptyHeartbeat)
{
    EXPECT_EQ(frame_message(FrameKind::Heartbeat, ""), "heartbeat\n\n\n");
    auto f = unframe("heartbeat\n\n\n");
    EXPECT_EQ(f.kind, FrameKind::Heartbeat);
    EXPECT_EQ(f.payload, "");
}

TEST(FrameTest, Errors)
{
    auto code = [](auto&& f) {
        try {
            f();
        }
        catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidParams;
    };
    EXPECT_EQ(code([] { unframe("report\n<abc>\n"); }), ErrorCode::FrameError);
    EXPECT_EQ(code([] { unframe("bogus\nx\n\n"); }), ErrorCode::FrameError);
    EXPECT_EQ(code([] { unframe("report\nx\n\nreport\ny\n\n"); }), ErrorCode::FrameError);
    EXPECT_EQ(code([] { frame_message(FrameKind::Report, "a\n\nb"); }), ErrorCode::FrameError);
    EXPECT_EQ(code([] { frame_message(FrameKind::Report, "a\n"); }), ErrorCode::FrameError);
}

TEST(FrameTest, ReaderSplitsStreamAtArbitraryCuts)
{
    std::string stream = frame_message(FrameKind::Heartbeat, "") + frame_message(FrameKind::Report, "a\nb")
                         + frame_message(FrameKind::Roster, "<TagId | Name>=<>");
    for (std::size_t cut = 0; cut <= stream.size(); ++cut) {
        FrameReader r;
        std::vector<Frame> got;
        r.feed(std::string_view(stream).substr(0, cut));
        while (auto f = r.next()) got.push_back(*f);
        r.feed(std::string_view(stream).substr(cut));
        while (auto f = r.next()) got.push_back(*f);
        ASSERT_EQ(got.size(), 3u) << cut;
        EXPECT_EQ(got[1].payload, "a\nb");
        EXPECT_EQ(got[2].kind, FrameKind::Roster);
    }
}

TEST(ReportPayloadTest, WithBatchAndTags)
{
    ReportPayload p;
    p.batch_id = "192.168.0.1-7";
    p.report.records = {record("192.168.0.1", "Rp1", "Room1", "28-09-2017T11:08:15"),
                        record("192.168.0.1", "Rp1", "Room1", "28-09-2017T11:08:16")};
    p.tags = TagRoster{{{TagId::parse("01008C7200"), "-"}, {TagId::parse("01008C7201"), "-"}}};
    auto text = encode_report_payload(p);
    EXPECT_EQ(text.substr(0, 20), "batch 192.168.0.1-7\n");
    EXPECT_EQ(decode_report_payload(text), p);
    EXPECT_EQ(batch_id_for(p, text), "192.168.0.1-7");
}

TEST(ReportPayloadTest, ListingWithoutTagsGetsContentId)
{
    auto text = read_fixture("report_listing.txt");
    auto p = decode_report_payload(text);
    EXPECT_FALSE(p.batch_id);
    EXPECT_FALSE(p.tags);
    EXPECT_EQ(p.report.records.size(), 4u);
    auto id = batch_id_for(p, text);
    EXPECT_EQ(id.substr(0, 4), "fnv-");
    EXPECT_EQ(id, batch_id_for(p, text));
}

TEST(ReportPayloadTest, RosterCountMustMatch)
{
    std::string text = encode_checkpoint_report({{record("192.168.0.1", "Rp1", "Room1", "28-09-2017T11:08:15")}})
                       + "\n<TagId | Name>=<>";
    EXPECT_THROW(decode_report_payload(text), GrammarError);
}

TEST(HeartbeatTest, Codec)
{
    Heartbeat hb{NodeId::parse("b8:27:eb:01:02:03"), Timestamp::parse("28-09-2017T11:08:15")};
    EXPECT_EQ(encode_heartbeat(hb), "b8:27:eb:01:02:03 28-09-2017T11:08:15");
    EXPECT_EQ(decode_heartbeat(encode_heartbeat(hb)), hb);
    EXPECT_FALSE(decode_heartbeat("").has_value());
    EXPECT_THROW(decode_heartbeat("b8:27:eb:01:02:03"), GrammarError);
}

// Generators for the round-trip laws.
struct Gen {
    std::mt19937_64 rng;

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

    TagId tag()
    {
        static const char* hex = "0123456789abcdefABCDEF";
        std::string s;
        for (int i = 0; i < 10; ++i) s += hex[uniform(0, 21)];
        return TagId::parse(s);
    }

    std::string name()
    {
        static const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .-_'()=:;!";
        std::string s;
        int n = uniform(1, 24);
        for (int i = 0; i < n; ++i) s += alphabet[uniform(0, static_cast<int>(alphabet.size()) - 1)];
        while (!s.empty() && s.front() == ' ') s.erase(0, 1);
        while (!s.empty() && s.back() == ' ') s.pop_back();
        return s.empty() ? "x" : s;
    }

    NodeId node()
    {
        if (uniform(0, 1)) {
            return NodeId::parse(std::to_string(uniform(0, 255)) + "." + std::to_string(uniform(0, 255)) + "."
                                 + std::to_string(uniform(0, 255)) + "." + std::to_string(uniform(0, 255)));
        }
        static const char* hex = "0123456789abcdefABCDEF";
        std::string s;
        for (int i = 0; i < 6; ++i) {
            if (i) s += ':';
            s += hex[uniform(0, 21)];
            s += hex[uniform(0, 21)];
        }
        return NodeId::parse(s);
    }

    RoomId room()
    {
        static const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-.";
        std::string s;
        int n = uniform(1, 12);
        for (int i = 0; i < n; ++i) s += alphabet[uniform(0, static_cast<int>(alphabet.size()) - 1)];
        return RoomId::parse(s);
    }

    Timestamp ts() { return Timestamp::from_seconds(std::uniform_int_distribution<std::int64_t>(0, 4'000'000'000LL)(rng)); }
};

TEST(WirePropertyTest, RosterRoundTrip)
{
    Gen g{std::mt19937_64(1)};
    for (int i = 0; i < 2000; ++i) {
        TagRoster r;
        int n = g.uniform(0, 8);
        for (int k = 0; k < n; ++k) r.entries.push_back({g.tag(), g.name()});
        auto text = encode_tag_roster(r);
        ASSERT_EQ(decode_tag_roster(text), r) << text;
        ASSERT_EQ(encode_tag_roster(decode_tag_roster(text)), text);
    }
}

TEST(WirePropertyTest, ReportRoundTripKeepsDuplicates)
{
    Gen g{std::mt19937_64(2)};
    for (int i = 0; i < 2000; ++i) {
        CheckpointReport c;
        int n = g.uniform(0, 8);
        for (int k = 0; k < n; ++k) {
            c.records.push_back({g.node(), g.name(), g.room(), g.ts()});
            if (g.uniform(0, 3) == 0) c.records.push_back(c.records.back());
        }
        auto text = encode_checkpoint_report(c);
        ASSERT_EQ(decode_checkpoint_report(text), c) << text;
        ASSERT_EQ(encode_checkpoint_report(decode_checkpoint_report(text)), text);
    }
}

TEST(ReplyTest, RoundTrips)
{
    for (const Reply& r : {Reply{Reply::Kind::Ack, 200, "fnv-00ab"}, Reply{Reply::Kind::Ok, 200, ""},
                           Reply{Reply::Kind::Reject, 403, "RejectedUnknownCheckpoint 10.0.0.9"},
                           Reply{Reply::Kind::Reject, 503, ""}}) {
        auto back = parse_reply(format_reply(r));
        EXPECT_EQ(back.kind, r.kind);
        EXPECT_EQ(back.status, r.status);
        EXPECT_EQ(back.detail, r.detail);
    }
    EXPECT_EQ(format_reply({Reply::Kind::Reject, 400, "a\nb"}), "reject 400 a b");
    EXPECT_EQ(parse_reply("ok\r").kind, Reply::Kind::Ok);
}

TEST(ReplyTest, RejectsGarbage)
{
    for (const char* bad : {"", "ack", "ack ", "reject", "reject x y", "reject 99 low", "OK"}) {
        EXPECT_THROW(parse_reply(bad), Error) << bad;
    }
}

} // namespace
} // namespace vtrack::wire
