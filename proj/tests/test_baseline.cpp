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

#include <cmath>
#include <numbers>

#include "csisense/baseline.hpp"
#include "csisense/config.hpp"
#include "csisense/metrics.hpp"
#include "csisense/dataset.hpp"
#include "csisense/error.hpp"

using namespace csisense;
using namespace csisense::baseline;
using geometry::Point2D;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

frame::CsiFrame filled(int links, int beams, const std::vector<channel::cvec>& per_link)
{
    std::vector<std::vector<channel::cvec>> csi(links);
    for (int l = 0; l < links; ++l) csi[l].assign(beams, per_link[l]);
    return frame::assemble_frame(csi);
}

channel::Scenario two_link()
{
    auto s = config::preset(2);
    s.channel.snr_db = std::numeric_limits<double>::infinity();
    return s;
}

}  // namespace

TEST_CASE("beam banks")
{
    const auto o = overlapped_bank();
    CHECK(o.angles.size() == 180);
    CHECK(o.width == doctest::Approx(30 * kDeg));
    CHECK(o.angles.front() > -std::numbers::pi / 2);
    CHECK(o.angles.back() < std::numbers::pi / 2);
    for (std::size_t i = 1; i < o.angles.size(); ++i) CHECK(o.angles[i] - o.angles[i - 1] == doctest::Approx(kDeg));
    const auto s = config::preset(1);
    CHECK(swept_bank(s).angles == s.beam_angles);
}

TEST_CASE("attenuation profile")
{
    const auto s = config::preset(1);
    const auto null_frame = dataset::simulate_frame(s, std::nullopt, 5);
    SUBCASE("no change gives a zero profile")
    {
        for (const auto& bank : {swept_bank(s), overlapped_bank()}) {
            const auto prof = attenuation_profile(null_frame, null_frame, 1, bank, s.beam_angles);
            CHECK(prof.size() == bank.angles.size());
            for (double v : prof) CHECK(v == 0.0);
        }
    }
    SUBCASE("halving one beam column")
    {
        auto alt = null_frame;
        for (int k = 0; k < 8; ++k) alt.at(8 + k, 2) *= 0.5;
        const auto prof = attenuation_profile(null_frame, alt, 1, swept_bank(s), s.beam_angles);
        for (std::size_t i = 0; i < prof.size(); ++i) {
            if (i == 2) {
                CHECK(prof[i] == doctest::Approx(20 * std::log10(2.0)).epsilon(1e-12));
            } else {
                CHECK(std::abs(prof[i]) < 1e-12);
            }
        }
        CHECK(prof[2] == doctest::Approx(6.0206).epsilon(1e-4));
    }
    SUBCASE("shape errors")
    {
        const auto other = dataset::simulate_frame(config::preset(3), std::nullopt, 5);
        CHECK_THROWS_AS(attenuation_profile(null_frame, other, 0, swept_bank(s), s.beam_angles), Error);
        CHECK_THROWS_AS(attenuation_profile(null_frame, null_frame, 3, swept_bank(s), s.beam_angles), Error);
    }
}

TEST_CASE("beam selection ties")
{
    const std::vector<double> angles{-0.5, -0.2, 0.2, 0.5};
    CHECK(select_beam({1, 3, 3, 1}, angles) == 1);
    CHECK(select_beam({4, 3, 3, 4}, angles) == 0);
    CHECK(select_beam({0, 0, 0, 0}, {-0.4, 0.0, 0.4, 0.8}) == 1);
}

TEST_CASE("noiseless triangulation")
{
    const auto s = two_link();
    const auto bank = overlapped_bank();
    const int n = s.n_antennas;
    for (auto [i1, i2] : {std::pair{60, 100}, std::pair{89, 120}, std::pair{70, 70}}) {
        const double th1 = bank.angles[i1];
        const double th2 = bank.angles[i2];
        const std::vector<geometry::BearingLine> lines{
            {s.receivers[0].position, geometry::wrap_angle(s.receivers[0].boresight + th1)},
            {s.receivers[1].position, geometry::wrap_angle(s.receivers[1].boresight + th2)}};
        const Point2D p = geometry::intersect_bearings(lines);
        REQUIRE(s.in_room(p));

        // Null = steered component + small constant; the target removes the
        // steered component, so attenuation peaks exactly at theta_l.
        channel::cvec e0(n, {0.0, 0.0});
        e0[0] = 0.01;
        auto h1 = channel::array_response(th1, n);
        auto h2 = channel::array_response(th2, n);
        h1[0] += 0.01;
        h2[0] += 0.01;
        const auto null_frame = filled(2, 7, {h1, h2});
        const auto alt_frame = filled(2, 7, {e0, e0});
        const auto est = estimate_position(null_frame, alt_frame, s, bank);
        CHECK(est.beams[0] == static_cast<std::size_t>(i1));
        CHECK(est.beams[1] == static_cast<std::size_t>(i2));
        CHECK(geometry::distance(est.position, p) < 1e-9);
        CHECK_FALSE(est.degraded);

        SUBCASE("argmax is invariant to common positive scaling")
        {
            auto a = null_frame;
            auto b = alt_frame;
            for (auto& v : a.data) v *= 123.0;
            for (auto& v : b.data) v *= 123.0;
            const auto scaled = estimate_position(a, b, s, bank);
            CHECK(scaled.beams == est.beams);
            CHECK(scaled.position == est.position);
        }
    }
}

TEST_CASE("parallel bearings fall back and are flagged")
{
    channel::Scenario s = two_link();
    s.receivers = {{{5.0, 1.0}, std::numbers::pi}, {{5.0, 3.0}, std::numbers::pi}};
    const auto bank = swept_bank(s);
    channel::cvec e0(8, {0.0, 0.0});
    e0[0] = 0.01;
    auto h = channel::array_response(0.0, 8);
    h[0] += 0.01;
    const auto est = estimate_position(filled(2, 7, {h, h}), filled(2, 7, {e0, e0}), s, bank);
    CHECK(est.degraded);
    CHECK(est.position.x == doctest::Approx(2.5));
    CHECK(est.position.y == doctest::Approx(2.0));
}

TEST_CASE("single link")
{
    const auto s = config::preset(3);
    const auto f = dataset::simulate_frame(s, std::nullopt, 1);
    const auto g = dataset::simulate_frame(s, geometry::Target{{2.5, 1.0}, 0.8}, 1);
    try {
        estimate_position(f, g, s, swept_bank(s));
        FAIL("expected SingleLink");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingleLink);
    }
    const auto est = estimate_single_link(f, g, s, swept_bank(s));
    CHECK(est.degraded);
    CHECK(s.in_room(est.position));
}

TEST_CASE("estimates stay inside the room")
{
    const auto s = config::preset(1);
    Rng rng(3);
    for (int i = 0; i < 60; ++i) {
        const geometry::Target t{dataset::sample_position(s, 0.8, rng), 0.8};
        const auto f = dataset::simulate_frame(s, std::nullopt, i);
        const auto g = dataset::simulate_frame(s, t, i);
        for (const auto& bank : {swept_bank(s), overlapped_bank()}) {
            CHECK(s.in_room(estimate_position(f, g, s, bank).position));
        }
    }
}

TEST_CASE("overlapped beams beat swept beams at the 95% bootstrap level")
{
    const auto s = config::preset(1);
    for (std::uint64_t seed : {4242u, 17u}) {
        const auto drops = metrics::random_drops(s, 0.8, 500, seed);
        const auto ov = metrics::baseline_errors(s, drops, overlapped_bank());
        const auto sw = metrics::baseline_errors(s, drops, swept_bank(s));
        const auto ci = metrics::paired_bootstrap(ov, sw, 2000, 0.95, seed);
        CHECK(ci.upper <= 0.0);
    }
}
