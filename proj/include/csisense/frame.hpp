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

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "csisense/channel.hpp"

namespace csisense::frame {

/// 2D-CSI frame: (L * N_r) rows by N_b beam columns. Link l occupies rows
/// l*N_r .. l*N_r + N_r - 1; column i holds beam i. Row-major storage.
struct CsiFrame {
    int links = 0;
    int n_antennas = 0;
    int n_beams = 0;
    std::vector<std::complex<double>> data;
    std::string scenario;
    std::uint64_t seed = 0;

    int rows() const { return links * n_antennas; }
    int cols() const { return n_beams; }
    std::complex<double>& at(int row, int col) { return data[static_cast<std::size_t>(row) * n_beams + col]; }
    const std::complex<double>& at(int row, int col) const { return data[static_cast<std::size_t>(row) * n_beams + col]; }
};

/// Real-valued view of a frame, rows x cols x 2 (real, imaginary), row-major.
struct FrameTensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    static constexpr int channels = 2;
    std::size_t size() const { return data.size(); }
    double& at(int r, int c, int ch) { return data[(static_cast<std::size_t>(r) * cols + c) * channels + ch]; }
    double at(int r, int c, int ch) const { return data[(static_cast<std::size_t>(r) * cols + c) * channels + ch]; }
};

/// Stacks per-link, per-beam CSI vectors: csi[l][i] is link l seen by beam i.
/// Throws ShapeMismatch on ragged input.
CsiFrame assemble_frame(const std::vector<std::vector<channel::cvec>>& csi);

FrameTensor to_tensor(const CsiFrame& frame);
CsiFrame from_tensor(const FrameTensor& tensor, int links, int n_antennas);

/// Global per-channel standardization constants.
struct NormStats {
    double mean[2] = {0.0, 0.0};
    double stddev[2] = {1.0, 1.0};

    friend bool operator==(const NormStats&, const NormStats&) = default;
};

inline constexpr double kStdFloor = 1e-12;

NormStats compute_stats(std::span<const FrameTensor> tensors);
FrameTensor normalize(const FrameTensor& tensor, const NormStats& stats);

/// Little-endian "CSIF" record: magic, u16 version, u16 L, N_r, N_b, then
/// row-major float64 (re, im) pairs.
void write_frame(std::ostream& out, const CsiFrame& frame);
CsiFrame read_frame(std::istream& in);

inline constexpr std::uint16_t kFrameVersion = 1;

}  // namespace csisense::frame
