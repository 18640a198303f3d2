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

#include "csisense/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "csisense/error.hpp"

namespace csisense::geometry {

namespace {

constexpr double kParallelTolerance = 1e-9;

}  // namespace

double dot(Point2D a, Point2D b) { return a.x * b.x + a.y * b.y; }

double norm(Point2D a) { return std::hypot(a.x, a.y); }

double distance(Point2D a, Point2D b) { return norm(b - a); }

double wrap_angle(double radians)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(radians, two_pi);  // [-pi, pi]
    if (r <= -std::numbers::pi) {
        r += two_pi;
    }
    return r;
}

double bearing(Point2D from, Point2D to)
{
    const Point2D d = to - from;
    return wrap_angle(std::atan2(d.y, d.x));
}

bool AngularInterval::contains(double angle) const
{
    return std::abs(wrap_angle(angle - center)) <= half_width;
}

AngularInterval occlusion_interval(Point2D viewpoint, const Target& target)
{
    const double d = distance(viewpoint, target.center);
    if (!(d > target.radius())) {
        throw Error(ErrorCode::ViewpointInsideTarget,
                    "viewpoint at distance " + std::to_string(d) + " from a target of radius " +
                        std::to_string(target.radius()));
    }
    return {bearing(viewpoint, target.center), std::asin(target.radius() / d)};
}

bool segment_blocked(Point2D a, Point2D b, const Target& target)
{
    if (a == b) {
        throw Error(ErrorCode::DegenerateSegment, "segment endpoints coincide");
    }
    // Closest point of the segment to the disk center.
    const Point2D ab = b - a;
    const double t = std::clamp(dot(target.center - a, ab) / dot(ab, ab), 0.0, 1.0);
    const Point2D closest = a + t * ab;
    const Point2D off = target.center - closest;
    const double r = target.radius();
    return dot(off, off) <= r * r;
}

bool in_shadow(Point2D x, Point2D viewpoint, const Target& target)
{
    return segment_blocked(viewpoint, x, target);
}

Point2D intersect_bearings(std::span<const BearingLine> lines)
{
    if (lines.size() < 2) {
        throw Error(ErrorCode::DegenerateGeometry, "need at least two bearing lines");
    }
    bool all_parallel = true;
    for (const auto& line : lines) {
        // Lines are undirected, so compare directions modulo pi.
        const double diff = std::remainder(line.direction - lines.front().direction, std::numbers::pi);
        if (std::abs(diff) > kParallelTolerance) {
            all_parallel = false;
            break;
        }
    }
    if (all_parallel) {
        throw Error(ErrorCode::DegenerateGeometry, "all bearing lines are parallel");
    }

    // Normal equations: sum (I - d d^T) p = sum (I - d d^T) o.
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (const auto& line : lines) {
        const double c = std::cos(line.direction);
        const double s = std::sin(line.direction);
        const double p11 = 1.0 - c * c;
        const double p12 = -c * s;
        const double p22 = 1.0 - s * s;
        a11 += p11;
        a12 += p12;
        a22 += p22;
        b1 += p11 * line.origin.x + p12 * line.origin.y;
        b2 += p12 * line.origin.x + p22 * line.origin.y;
    }
    const double det = a11 * a22 - a12 * a12;
    return {(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
}

}  // namespace csisense::geometry
