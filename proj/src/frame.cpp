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

#include "csisense/frame.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "binary_io.hpp"
#include "csisense/error.hpp"

namespace csisense::frame {

CsiFrame assemble_frame(const std::vector<std::vector<channel::cvec>>& csi)
{
    if (csi.empty() || csi.front().empty() || csi.front().front().empty()) {
        throw Error(ErrorCode::ShapeMismatch, "empty CSI input");
    }
    CsiFrame f;
    f.links = static_cast<int>(csi.size());
    f.n_beams = static_cast<int>(csi.front().size());
    f.n_antennas = static_cast<int>(csi.front().front().size());
    for (const auto& link : csi) {
        if (static_cast<int>(link.size()) != f.n_beams) {
            throw Error(ErrorCode::ShapeMismatch, "links disagree on beam count");
        }
        for (const auto& h : link) {
            if (static_cast<int>(h.size()) != f.n_antennas) {
                throw Error(ErrorCode::ShapeMismatch, "CSI vectors disagree on antenna count");
            }
        }
    }
    f.data.resize(static_cast<std::size_t>(f.rows()) * f.cols());
    for (int l = 0; l < f.links; ++l) {
        for (int i = 0; i < f.n_beams; ++i) {
            for (int k = 0; k < f.n_antennas; ++k) {
                f.at(l * f.n_antennas + k, i) = csi[l][i][k];
            }
        }
    }
    return f;
}

FrameTensor to_tensor(const CsiFrame& frame)
{
    FrameTensor t;
    t.rows = frame.rows();
    t.cols = frame.cols();
    t.data.resize(frame.data.size() * 2);
    for (std::size_t i = 0; i < frame.data.size(); ++i) {
        t.data[2 * i] = frame.data[i].real();
        t.data[2 * i + 1] = frame.data[i].imag();
    }
    return t;
}

CsiFrame from_tensor(const FrameTensor& tensor, int links, int n_antennas)
{
    if (links * n_antennas != tensor.rows) {
        throw Error(ErrorCode::ShapeMismatch, "tensor rows do not match L * N_r");
    }
    CsiFrame f;
    f.links = links;
    f.n_antennas = n_antennas;
    f.n_beams = tensor.cols;
    f.data.resize(tensor.data.size() / 2);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        f.data[i] = {tensor.data[2 * i], tensor.data[2 * i + 1]};
    }
    return f;
}

NormStats compute_stats(std::span<const FrameTensor> tensors)
{
    NormStats s;
    for (int ch = 0; ch < 2; ++ch) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& t : tensors) {
            for (std::size_t i = ch; i < t.data.size(); i += 2) sum += t.data[i];
            n += t.data.size() / 2;
        }
        if (n == 0) return s;
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const auto& t : tensors) {
            for (std::size_t i = ch; i < t.data.size(); i += 2) ss += (t.data[i] - mean) * (t.data[i] - mean);
        }
        s.mean[ch] = mean;
        s.stddev[ch] = std::sqrt(ss / static_cast<double>(n));
    }
    return s;
}

FrameTensor normalize(const FrameTensor& tensor, const NormStats& stats)
{
    FrameTensor out = tensor;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const int ch = static_cast<int>(i % 2);
        out.data[i] = (out.data[i] - stats.mean[ch]) / std::max(stats.stddev[ch], kStdFloor);
    }
    return out;
}

void write_frame(std::ostream& out, const CsiFrame& frame)
{
    constexpr auto max16 = std::numeric_limits<std::uint16_t>::max();
    if (frame.links > max16 || frame.n_antennas > max16 || frame.n_beams > max16) {
        throw Error(ErrorCode::ShapeMismatch, "frame dimensions exceed the u16 header fields");
    }
    binary::put_magic(out, "CSIF");
    binary::put<std::uint16_t>(out, kFrameVersion);
    binary::put<std::uint16_t>(out, static_cast<std::uint16_t>(frame.links));
    binary::put<std::uint16_t>(out, static_cast<std::uint16_t>(frame.n_antennas));
    binary::put<std::uint16_t>(out, static_cast<std::uint16_t>(frame.n_beams));
    for (const auto& z : frame.data) {
        binary::put<double>(out, z.real());
        binary::put<double>(out, z.imag());
    }
    if (!out) {
        throw Error(ErrorCode::Io, "failed to write frame");
    }
}

CsiFrame read_frame(std::istream& in)
{
    binary::expect_magic(in, "CSIF");
    const auto version = binary::get<std::uint16_t>(in);
    if (version != kFrameVersion) {
        throw Error(ErrorCode::Io, "unsupported frame version " + std::to_string(version));
    }
    CsiFrame f;
    f.links = binary::get<std::uint16_t>(in);
    f.n_antennas = binary::get<std::uint16_t>(in);
    f.n_beams = binary::get<std::uint16_t>(in);
    f.data.resize(static_cast<std::size_t>(f.rows()) * f.cols());
    for (auto& z : f.data) {
        const double re = binary::get<double>(in);
        const double im = binary::get<double>(in);
        z = {re, im};
    }
    return f;
}

}  // namespace csisense::frame
