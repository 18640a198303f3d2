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

#include "csisense/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "csisense/error.hpp"

namespace csisense::baseline {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kEnergyFloor = 1e-12;

std::size_t nearest_index(const std::vector<double>& angles, double theta)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < angles.size(); ++i) {
        if (std::abs(angles[i] - theta) < std::abs(angles[best] - theta)) best = i;
    }
    return best;
}

double steered_energy(const frame::CsiFrame& f, int link, std::size_t col, const channel::cvec& a)
{
    std::complex<double> acc = 0.0;
    for (int k = 0; k < f.n_antennas; ++k) acc += std::conj(a[k]) * f.at(link * f.n_antennas + k, static_cast<int>(col));
    return std::max(std::abs(acc), kEnergyFloor);
}

void check_frames(const frame::CsiFrame& null_frame, const frame::CsiFrame& alt_frame, int link,
                  const std::vector<double>& sweep_angles)
{
    if (null_frame.links != alt_frame.links || null_frame.n_antennas != alt_frame.n_antennas ||
        null_frame.n_beams != alt_frame.n_beams) {
        throw Error(ErrorCode::ShapeMismatch, "null and alternate frames differ in shape");
    }
    if (link < 0 || link >= null_frame.links) throw Error(ErrorCode::ShapeMismatch, "link index out of range");
    if (sweep_angles.size() != static_cast<std::size_t>(null_frame.n_beams)) {
        throw Error(ErrorCode::ShapeMismatch, "sweep angles do not match the frame's beam count");
    }
}

std::vector<geometry::BearingLine> bearing_lines(const frame::CsiFrame& null_frame, const frame::CsiFrame& alt_frame,
                                                 const channel::Scenario& scenario, const BeamBank& bank,
                                                 Estimate& est)
{
    if (static_cast<std::size_t>(null_frame.links) != scenario.links()) {
        throw Error(ErrorCode::ShapeMismatch, "frame link count does not match the scenario");
    }
    std::vector<geometry::BearingLine> lines;
    for (int l = 0; l < null_frame.links; ++l) {
        const auto profile = attenuation_profile(null_frame, alt_frame, l, bank, scenario.beam_angles);
        const std::size_t j = select_beam(profile, bank.angles);
        const auto& rx = scenario.receivers[static_cast<std::size_t>(l)];
        const double global = geometry::wrap_angle(rx.boresight + bank.angles[j]);
        est.beams.push_back(j);
        est.bearings.push_back(global);
        lines.push_back({rx.position, global});
    }
    return lines;
}

}  // namespace

const char* to_string(Variant v) { return v == Variant::Swept ? "swept" : "overlapped"; }

BeamBank swept_bank(const channel::Scenario& scenario)
{
    BeamBank bank;
    bank.variant = Variant::Swept;
    bank.angles = scenario.beam_angles;
    bank.width = bank.angles.size() > 1 ? std::abs(bank.angles[1] - bank.angles[0]) : std::numbers::pi;
    return bank;
}

BeamBank overlapped_bank()
{
    BeamBank bank;
    bank.variant = Variant::Overlapped;
    bank.width = 30.0 * kDeg;
    for (int k = 0; k < 180; ++k) bank.angles.push_back((-89.5 + k) * kDeg);
    return bank;
}

std::vector<double> attenuation_profile(const frame::CsiFrame& null_frame, const frame::CsiFrame& alt_frame,
                                        int link, const BeamBank& bank, const std::vector<double>& sweep_angles)
{
    check_frames(null_frame, alt_frame, link, sweep_angles);
    std::vector<double> profile;
    profile.reserve(bank.angles.size());
    for (double theta : bank.angles) {
        const auto a = channel::array_response(theta, null_frame.n_antennas);
        const std::size_t col = nearest_index(sweep_angles, theta);
        profile.push_back(20.0 * std::log10(steered_energy(null_frame, link, col, a) /
                                            steered_energy(alt_frame, link, col, a)));
    }
    return profile;
}

std::size_t select_beam(const std::vector<double>& profile, const std::vector<double>& angles)
{
    if (profile.empty() || profile.size() != angles.size()) {
        throw Error(ErrorCode::ShapeMismatch, "profile and bank sizes differ");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < profile.size(); ++i) {
        if (profile[i] > profile[best] ||
            (profile[i] == profile[best] && std::abs(angles[i]) < std::abs(angles[best]))) {
            best = i;
        }
    }
    return best;
}

geometry::Point2D clamp_to_room(geometry::Point2D p, double room_side)
{
    return {std::clamp(p.x, 0.0, room_side), std::clamp(p.y, 0.0, room_side)};
}

Estimate estimate_position(const frame::CsiFrame& null_frame, const frame::CsiFrame& alt_frame,
                           const channel::Scenario& scenario, const BeamBank& bank)
{
    if (scenario.links() < 2) {
        throw Error(ErrorCode::SingleLink, "triangulation needs at least two receivers");
    }
    Estimate est;
    const auto lines = bearing_lines(null_frame, alt_frame, scenario, bank, est);
    geometry::Point2D p;
    try {
        p = geometry::intersect_bearings(lines);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateGeometry) throw;
        // Parallel bearings: average the projections of the room center.
        const geometry::Point2D c{0.5 * scenario.room_side, 0.5 * scenario.room_side};
        for (const auto& line : lines) {
            const geometry::Point2D d{std::cos(line.direction), std::sin(line.direction)};
            const geometry::Point2D proj = line.origin + geometry::dot(c - line.origin, d) * d;
            p = p + (1.0 / static_cast<double>(lines.size())) * proj;
        }
        est.degraded = true;
    }
    est.position = clamp_to_room(p, scenario.room_side);
    return est;
}

Estimate estimate_single_link(const frame::CsiFrame& null_frame, const frame::CsiFrame& alt_frame,
                              const channel::Scenario& scenario, const BeamBank& bank)
{
    Estimate est;
    const auto lines = bearing_lines(null_frame, alt_frame, scenario, bank, est);
    const auto& line = lines.front();
    const geometry::Point2D d{std::cos(line.direction), std::sin(line.direction)};
    // Distance to the first wall crossed along the bearing.
    double t = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 2; ++axis) {
        const double o = axis == 0 ? line.origin.x : line.origin.y;
        const double v = axis == 0 ? d.x : d.y;
        if (v > 1e-12) t = std::min(t, (scenario.room_side - o) / v);
        if (v < -1e-12) t = std::min(t, -o / v);
    }
    if (!std::isfinite(t)) t = 0.0;
    est.position = clamp_to_room(line.origin + (0.5 * t) * d, scenario.room_side);
    est.degraded = true;
    return est;
}

}  // namespace csisense::baseline
