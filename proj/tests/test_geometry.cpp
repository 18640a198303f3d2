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

#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include "csisense/error.hpp"
#include "csisense/geometry.hpp"
#include "csisense/rng.hpp"
#include "geometry_oracles.hpp"

using namespace csisense;
using namespace csisense::geometry;

TEST_CASE("occlusion interval")
{
    SUBCASE("half-width is asin(r/d)")
    {
        const auto iv = occlusion_interval({0, 0}, {{2, 0}, 0.8});
        CHECK(iv.center == doctest::Approx(0.0));
        CHECK(iv.half_width == doctest::Approx(std::asin(0.2)).epsilon(1e-12));
        CHECK(iv.half_width == doctest::Approx(0.20136).epsilon(1e-4));
    }
    SUBCASE("matches dense angular sampling of segment_blocked")
    {
        const Target t{{2, 0}, 0.8};
        double lo = 0.0;
        double hi = 0.0;
        for (int k = -300000; k <= 300000; ++k) {
            const double a = k * 1e-6;
            const Point2D far{10 * std::cos(a), 10 * std::sin(a)};
            if (segment_blocked({0, 0}, far, t)) {
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
        }
        const auto iv = occlusion_interval({0, 0}, t);
        CHECK(std::abs(hi - iv.half_width) < 2e-6);
        CHECK(std::abs(-lo - iv.half_width) < 2e-6);
    }
    SUBCASE("point target")
    {
        const auto iv = occlusion_interval({0, 0}, {{0, 3}, 1e-12});
        CHECK(iv.center == doctest::Approx(std::numbers::pi / 2));
        CHECK(iv.half_width < 1e-12);
    }
    SUBCASE("viewpoint inside")
    {
        CHECK_THROWS_AS(occlusion_interval({0, 0}, {{0.1, 0}, 0.8}), Error);
        try {
            occlusion_interval({0, 0}, {{0.1, 0}, 0.8});
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ViewpointInsideTarget);
        }
    }
    SUBCASE("wraps across pi")
    {
        const auto iv = occlusion_interval({0, 0}, {{-3, 0}, 1.0});
        CHECK(iv.contains(std::numbers::pi));
        CHECK(iv.contains(-std::numbers::pi + 0.1));
        CHECK_FALSE(iv.contains(0.0));
    }
    SUBCASE("monotone in size and distance")
    {
        double prev = 0.0;
        for (double s = 0.1; s < 1.9; s += 0.1) {
            const double w = occlusion_interval({0, 0}, {{2, 0}, s}).half_width;
            CHECK(w > prev);
            prev = w;
        }
        prev = 10.0;
        for (double d = 1.0; d < 6.0; d += 0.25) {
            const double w = occlusion_interval({0, 0}, {{d, 0}, 0.8}).half_width;
            CHECK(w < prev);
            prev = w;
        }
    }
}

TEST_CASE("segment blocking")
{
    CHECK(segment_blocked({0, 0}, {4, 0}, {{2, 0}, 0.8}));
    CHECK_FALSE(segment_blocked({0, 0}, {4, 0}, {{2, 1}, 0.8}));
    CHECK(segment_blocked({0, 0}, {4, 0}, {{2, 0.4}, 0.8}));
    CHECK_FALSE(segment_blocked({0, 0}, {1, 0}, {{2, 0}, 0.8}));
    CHECK(segment_blocked({0, 0}, {1.6, 0}, {{2, 0}, 0.8}));
    CHECK_THROWS_AS(segment_blocked({1, 1}, {1, 1}, {{2, 0}, 0.8}), Error);

    SUBCASE("symmetric")
    {
        Rng rng(3);
        for (int i = 0; i < 2000; ++i) {
            const Point2D a{rng.uniform(0, 5), rng.uniform(0, 5)};
            const Point2D b{rng.uniform(0, 5), rng.uniform(0, 5)};
            const Target t{{rng.uniform(0, 5), rng.uniform(0, 5)}, rng.uniform(0.1, 1.5)};
            CHECK(segment_blocked(a, b, t) == segment_blocked(b, a, t));
        }
    }
}

TEST_CASE("shadow membership")
{
    const Target t{{2, 0}, 0.8};
    CHECK(in_shadow({4, 0}, {0, 0}, t));
    CHECK_FALSE(in_shadow({1, 0}, {0, 0}, t));

    SUBCASE("equals the occlusion-cone formulation")
    {
        // x is shadowed iff its bearing is inside the cone and it lies past
        // the tangent points, or it is inside the disk itself.
        Rng rng(11);
        int disagreements = 0;
        for (int i = 0; i < 10000; ++i) {
            const Point2D v{rng.uniform(0, 5), rng.uniform(0, 5)};
            const Target tt{{rng.uniform(0.5, 4.5), rng.uniform(0.5, 4.5)}, rng.uniform(0.1, 1.2)};
            if (distance(v, tt.center) <= tt.radius() + 1e-6) continue;
            const Point2D x{rng.uniform(0, 5), rng.uniform(0, 5)};
            if (distance(x, v) < 1e-9) continue;
            const auto iv = occlusion_interval(v, tt);
            const double dc = distance(v, tt.center);
            const double off = wrap_angle(bearing(v, x) - iv.center);
            bool cone = false;
            if (distance(x, tt.center) <= tt.radius()) {
                cone = true;
            } else if (std::abs(off) <= iv.half_width) {
                // Near intersection distance of the ray with the circle.
                const double along = dc * std::cos(off);
                const double perp2 = dc * dc * std::sin(off) * std::sin(off);
                const double entry = along - std::sqrt(std::max(0.0, tt.radius() * tt.radius() - perp2));
                cone = distance(v, x) >= entry;
            }
            // Skip samples within rounding distance of the rim.
            const Point2D d = x - v;
            double s = dot(tt.center - v, d) / dot(d, d);
            s = std::clamp(s, 0.0, 1.0);
            const double clearance = distance(v + s * d, tt.center) - tt.radius();
            if (std::abs(clearance) < 1e-9) continue;
            if (cone != in_shadow(x, v, tt)) ++disagreements;
        }
        CHECK(disagreements == 0);
    }
}

TEST_CASE("in_shadow agrees with an independent segment-disk oracle")
{
    Rng rng(2024);
    int disagreements = 0;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 10000; ++i) {
        const Point2D v{rng.uniform(0, 5), rng.uniform(0, 5)};
        const Point2D x{rng.uniform(0, 5), rng.uniform(0, 5)};
        const Target t{{rng.uniform(0, 5), rng.uniform(0, 5)}, rng.uniform(0.05, 2.0)};
        if (in_shadow(x, v, t) != oracle::quadratic_blocked(v, x, t)) ++disagreements;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(disagreements == 0);
    CHECK(secs < 1.0);
}

TEST_CASE("bearing intersection")
{
    const double pi = std::numbers::pi;
    SUBCASE("two lines")
    {
        const std::vector<BearingLine> lines{{{0, 0}, pi / 4}, {{4, 0}, 3 * pi / 4}};
        const auto p = intersect_bearings(lines);
        CHECK(p.x == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(p.y == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("degenerate")
    {
        const std::vector<BearingLine> same{{{0, 0}, 0.3}, {{0, 0}, 0.3}};
        CHECK_THROWS_AS(intersect_bearings(same), Error);
        const std::vector<BearingLine> opposite{{{0, 0}, 0.3}, {{1, 0}, 0.3 - pi}};
        CHECK_THROWS_AS(intersect_bearings(opposite), Error);
        const std::vector<BearingLine> one{{{0, 0}, 0.3}};
        CHECK_THROWS_AS(intersect_bearings(one), Error);
    }
    SUBCASE("noiseless lines through a point")
    {
        Rng rng(5);
        for (int k : {2, 3, 5}) {
            for (int trial = 0; trial < 50; ++trial) {
                const Point2D p{rng.uniform(0, 5), rng.uniform(0, 5)};
                std::vector<BearingLine> lines;
                for (int i = 0; i < k; ++i) {
                    Point2D o{rng.uniform(0, 5), rng.uniform(0, 5)};
                    while (distance(o, p) < 0.5) o = {rng.uniform(0, 5), rng.uniform(0, 5)};
                    lines.push_back({o, bearing(o, p)});
                }
                const double cross = std::sin(lines[0].direction - lines[1].direction);
                if (std::abs(cross) < 0.05) continue;
                const auto q = intersect_bearings(lines);
                CHECK(distance(p, q) < 1e-9);
            }
        }
        const std::vector<BearingLine> three{{{0, 0}, bearing({0, 0}, {1.5, 2.5})},
                                             {{5, 0}, bearing({5, 0}, {1.5, 2.5})},
                                             {{5, 5}, bearing({5, 5}, {1.5, 2.5})}};
        CHECK(distance(intersect_bearings(three), {1.5, 2.5}) < 1e-9);
    }
}

TEST_CASE("angle helpers")
{
    const double pi = std::numbers::pi;
    CHECK(wrap_angle(pi) == doctest::Approx(pi));
    CHECK(wrap_angle(-pi) == doctest::Approx(pi));
    CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
    CHECK(bearing({0, 0}, {0, 1}) == doctest::Approx(pi / 2));
}
