// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The csisense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "csisense/config.hpp"
#include "csisense/error.hpp"

using namespace csisense;

namespace {

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("presets")
{
    for (int i = 1; i <= 3; ++i) {
        const auto s = config::preset(i);
        CHECK(s.links() == static_cast<std::size_t>(4 - i));
        CHECK(s.n_antennas == 8);
        CHECK(s.beams() == 7);
        CHECK(s.beam_angles.front() == doctest::Approx(-std::numbers::pi / 2));
        CHECK(s.room_side == 5.0);
        const auto file = std::filesystem::path(CSISENSE_PRESET_DIR) / ("scenario" + std::to_string(i) + ".cfg");
        CHECK(read_file(file) == config::preset_text(i));
    }
    CHECK_THROWS_AS(config::preset(4), Error);
}

TEST_CASE("json round trip")
{
    const auto s = config::preset(1);
    const auto t = config::scenario_from_json(config::scenario_to_json(s));
    CHECK(t.tx == s.tx);
    REQUIRE(t.receivers.size() == s.receivers.size());
    for (std::size_t i = 0; i < t.receivers.size(); ++i) {
        CHECK(t.receivers[i].position == s.receivers[i].position);
        CHECK(t.receivers[i].boresight == doctest::Approx(s.receivers[i].boresight));
    }
    CHECK(t.channel.intra_cluster_scale == doctest::Approx(s.channel.intra_cluster_scale));
    CHECK(t.channel.environment == s.channel.environment);
}

TEST_CASE("validation")
{
    auto j = nlohmann::json::parse(config::preset_text(1));
    SUBCASE("unknown key")
    {
        j["colour"] = "red";
        CHECK_THROWS_AS(config::scenario_from_json(j), Error);
    }
    SUBCASE("unknown channel key")
    {
        j["channel"]["foo"] = 1;
        CHECK_THROWS_AS(config::scenario_from_json(j), Error);
    }
    SUBCASE("receiver outside the room")
    {
        j["receivers"][0]["x"] = 6.0;
        CHECK_THROWS_AS(config::scenario_from_json(j), Error);
    }
    SUBCASE("unsorted beams")
    {
        j["beam_angles_deg"] = {30.0, 0.0};
        CHECK_THROWS_AS(config::scenario_from_json(j), Error);
    }
    SUBCASE("bad environment")
    {
        j["channel"]["environment"] = "sometimes";
        CHECK_THROWS_AS(config::scenario_from_json(j), Error);
    }
    SUBCASE("wrong type")
    {
        j["n_antennas"] = "eight";
        CHECK_THROWS_AS(config::scenario_from_json(j), Error);
    }
    SUBCASE("missing file")
    {
        try {
            config::load_scenario("/nonexistent/scenario.cfg");
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Io);
        }
    }
}
