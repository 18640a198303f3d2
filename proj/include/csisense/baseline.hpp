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

#include <vector>

#include "csisense/channel.hpp"
#include "csisense/frame.hpp"
#include "csisense/geometry.hpp"

namespace csisense::baseline {

enum class Variant { Swept, Overlapped };

const char* to_string(Variant v);

/// Receiver-local steering angles scanned for the attenuation peak.
struct BeamBank {
    Variant variant = Variant::Swept;
    std::vector<double> angles;  // radians, ascending
    double width = 0.0;          // nominal main-lobe width, radians
};

/// The scenario's own sweep angles.
BeamBank swept_bank(const channel::Scenario& scenario);

/// 180 beams of nominal 30 degree width at 1 degree stride inside (-90, 90) degrees.
BeamBank overlapped_bank();

/// Attenuation in dB at each bank angle for receiver `link`:
/// 20 log10(E_null / E_alt), where E(theta) = |a(theta)^H h| and h is the
/// column of the link's row block recorded by the sweep beam nearest theta.
/// Energies are floored at 1e-12. Throws ShapeMismatch.
std::vector<double> attenuation_profile(const frame::CsiFrame& null_frame, const frame::CsiFrame& alt_frame,
                                        int link, const BeamBank& bank, const std::vector<double>& sweep_angles);

/// Index of the largest attenuation; ties go to the smaller |angle|, then the
/// lower index.
std::size_t select_beam(const std::vector<double>& profile, const std::vector<double>& angles);

struct Estimate {
    geometry::Point2D position;
    std::vector<std::size_t> beams;  // selected bank index per receiver
    std::vector<double> bearings;    // global bearing per receiver
    bool degraded = false;           // bearings were parallel or L = 1 fallback
};

/// Triangulates the max-attenuation bearings of all receivers and clamps the
/// result to the room. Throws SingleLink when L = 1.
Estimate estimate_position(const frame::CsiFrame& null_frame, const frame::CsiFrame& alt_frame,
                           const channel::Scenario& scenario, const BeamBank& bank);

/// L = 1 fallback: midpoint of the chord from the receiver along its
/// max-attenuation bearing to the room boundary, flagged as degraded.
Estimate estimate_single_link(const frame::CsiFrame& null_frame, const frame::CsiFrame& alt_frame,
                              const channel::Scenario& scenario, const BeamBank& bank);

geometry::Point2D clamp_to_room(geometry::Point2D p, double room_side);

}  // namespace csisense::baseline
