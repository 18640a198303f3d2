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

#pragma once

#include <span>

namespace csisense::geometry {

/// Planar position in meters. Global frame: +x right, +y up, angles
/// counterclockwise from +x.
struct Point2D {
    double x = 0.0;
    double y = 0.0;

    friend Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2D operator*(double s, Point2D a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point2D a, Point2D b) = default;
};

double dot(Point2D a, Point2D b);
double norm(Point2D a);
double distance(Point2D a, Point2D b);

/// Bearing of `to` as seen from `from`, in (-pi, pi].
double bearing(Point2D from, Point2D to);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

/// Disk-shaped passive object.
struct Target {
    Point2D center;
    double diameter = 0.0;

    double radius() const { return 0.5 * diameter; }
};

/// Angular interval subtended by a target, centered on `center`.
struct AngularInterval {
    double center = 0.0;      // (-pi, pi]
    double half_width = 0.0;  // [0, pi/2)

    /// True if `angle` lies in the closed interval, with wrap-around.
    bool contains(double angle) const;
};

struct BearingLine {
    Point2D origin;
    double direction = 0.0;  // (-pi, pi]
};

/// Interval of bearings from `viewpoint` that hit the target disk.
/// Throws ViewpointInsideTarget when the viewpoint is not strictly outside.
AngularInterval occlusion_interval(Point2D viewpoint, const Target& target);

/// True iff the closed segment a-b meets the closed target disk. Tangency
/// and endpoints on the rim count as blocked. Throws DegenerateSegment if a == b.
bool segment_blocked(Point2D a, Point2D b, const Target& target);

/// True iff `x` lies in the shadow cast by the target as seen from
/// `viewpoint`, i.e. the sight line viewpoint-x is blocked.
bool in_shadow(Point2D x, Point2D viewpoint, const Target& target);

/// Least-squares point minimizing the summed squared perpendicular distance to
/// the given (infinite) lines. Throws DegenerateGeometry when fewer than two
/// lines are given or all are parallel within 1e-9 rad.
Point2D intersect_bearings(std::span<const BearingLine> lines);

}  // namespace csisense::geometry
