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
#include "vtrack/types.h"

#include <gtest/gtest.h>

#include <random>

namespace vtrack {
namespace {

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    }
    catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidParams;
}

TEST(TagIdTest, AcceptsListingValue)
{
    EXPECT_EQ(validate_tag_id("01008C7200").str(), "01008C7200");
}

TEST(TagIdTest, NormalizesCase)
{
    EXPECT_EQ(validate_tag_id("01008c7200").str(), "01008C7200");
    EXPECT_EQ(validate_tag_id("01008c7200"), validate_tag_id("01008C7200"));
}

TEST(TagIdTest, RejectsBadShapes)
{
    EXPECT_EQ(code_of([] { validate_tag_id("01008C720"); }), ErrorCode::MalformedTagId);
    EXPECT_EQ(code_of([] { validate_tag_id("01008C72000"); }), ErrorCode::MalformedTagId);
    EXPECT_EQ(code_of([] { validate_tag_id("01008C720G"); }), ErrorCode::MalformedTagId);
    EXPECT_EQ(code_of([] { validate_tag_id(""); }), ErrorCode::MalformedTagId);
}

TEST(NodeIdTest, Ipv4)
{
    EXPECT_EQ(normalize_node_id("192.168.0.1").str(), "192.168.0.1");
    EXPECT_EQ(normalize_node_id("192.168.000.001").str(), "192.168.0.1");
    EXPECT_EQ(normalize_node_id("192.168.0.1").kind(), NodeId::Kind::Ipv4);
    EXPECT_EQ(normalize_node_id("010.0.0.1"), normalize_node_id("10.0.0.1"));
}

TEST(NodeIdTest, Mac)
{
    auto n = normalize_node_id("B8:27:EB:01:02:03");
    EXPECT_EQ(n.str(), "b8:27:eb:01:02:03");
    EXPECT_EQ(n.kind(), NodeId::Kind::Mac);
}

TEST(NodeIdTest, Rejects)
{
    for (const char* raw : {"192.168.0.256", "192.168.0", "192.168.0.1.5", "1..2.3", "a.b.c.d",
                            "b8:27:eb:01:02", "b8-27-eb-01-02-03", "b8:27:eb:01:02:0g", "", "1234.1.1.1"}) {
        EXPECT_EQ(code_of([&] { normalize_node_id(raw); }), ErrorCode::MalformedNodeId) << raw;
    }
}

TEST(TimestampTest, ParsesListingSample)
{
    auto t = parse_timestamp("28-09-2017T11:08:15");
    EXPECT_EQ(t, Timestamp::from_civil(2017, 9, 28, 11, 8, 15));
    EXPECT_EQ(t.format(), "28-09-2017T11:08:15");
}

TEST(TimestampTest, RoundTripAndPadding)
{
    EXPECT_EQ(format_timestamp(parse_timestamp("01-01-2020T00:00:00")), "01-01-2020T00:00:00");
    EXPECT_EQ(Timestamp::from_civil(2020, 2, 29, 9, 5, 7).format(), "29-02-2020T09:05:07");
    EXPECT_EQ(parse_timestamp("01-01-1970T00:00:00").seconds(), 0);
}

TEST(TimestampTest, RejectsInvalid)
{
    for (const char* raw : {"31-02-2017T10:00:00", "29-02-2019T10:00:00", "28-13-2017T10:00:00",
                            "28-09-2017T24:00:00", "28-09-2017T11:60:15", "28-09-2017 11:08:15",
                            "28-9-2017T11:08:15", "28-09-2017T11:08:1x", "00-01-2017T00:00:00", ""}) {
        EXPECT_EQ(code_of([&] { parse_timestamp(raw); }), ErrorCode::MalformedTimestamp) << raw;
    }
}

TEST(TimestampTest, ArithmeticIsSeconds)
{
    auto t = parse_timestamp("31-12-2019T23:59:59");
    EXPECT_EQ((t + 1).format(), "01-01-2020T00:00:00");
    EXPECT_EQ((t + 1) - t, 1);
}

// parse(format(x)) == x over a wide range of instants, including pre-epoch.
TEST(TimestampTest, FormatParseProperty)
{
    std::mt19937_64 rng(20170928);
    std::uniform_int_distribution<std::int64_t> secs(-60'000'000'000LL, 200'000'000'000LL);
    for (int i = 0; i < 20000; ++i) {
        auto t = Timestamp::from_seconds(secs(rng));
        std::string text = t.format();
        ASSERT_EQ(Timestamp::parse(text), t) << text;
        ASSERT_EQ(Timestamp::parse(text).format(), text);
    }
}

TEST(NodeIdTest, CanonicalizationIsIdempotent)
{
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> octet(0, 255);
    for (int i = 0; i < 5000; ++i) {
        std::string ip;
        for (int k = 0; k < 4; ++k) {
            if (k) ip += '.';
            int v = octet(rng);
            ip += (rng() % 3 == 0 && v < 100) ? "0" + std::to_string(v) : std::to_string(v);
        }
        auto once = normalize_node_id(ip);
        EXPECT_EQ(normalize_node_id(once.str()), once);
        EXPECT_EQ(normalize_node_id(once.str()).str(), once.str());
    }
}

TEST(RoomIdTest, Tokens)
{
    EXPECT_EQ(RoomId::parse("stairs_g1").str(), "stairs_g1");
    EXPECT_EQ(code_of([] { RoomId::parse("Room 1"); }), ErrorCode::MalformedRoomId);
    EXPECT_EQ(code_of([] { RoomId::parse("a|b"); }), ErrorCode::MalformedRoomId);
    EXPECT_EQ(code_of([] { RoomId::parse(""); }), ErrorCode::MalformedRoomId);
}

TEST(NameTest, ReservedCharacters)
{
    EXPECT_EQ(validate_name("Visitor Name1"), "Visitor Name1");
    for (const char* raw : {"a|b", "a,b", "<a", "a>", "", " lead", "trail ", "tab\there"}) {
        EXPECT_EQ(code_of([&] { validate_name(raw); }), ErrorCode::MalformedName) << raw;
    }
}

TEST(DemographicTest, RoundTrip)
{
    for (auto d : {Demographic::Female, Demographic::Male, Demographic::Unspecified}) {
        EXPECT_EQ(parse_demographic(to_string(d)), d);
    }
    EXPECT_EQ(code_of([] { parse_demographic("other"); }), ErrorCode::InvalidParams);
}

} // namespace
} // namespace vtrack
