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
#include <sstream>

#include "csisense/error.hpp"
#include "csisense/frame.hpp"
#include "csisense/rng.hpp"

using namespace csisense;
using namespace csisense::frame;
using channel::cvec;

namespace {

std::vector<std::vector<cvec>> random_csi(int links, int beams, int n, Rng& rng)
{
    std::vector<std::vector<cvec>> csi(links);
    for (auto& link : csi) {
        for (int i = 0; i < beams; ++i) {
            cvec h(n);
            for (auto& e : h) e = {rng.normal(), rng.normal()};
            link.push_back(h);
        }
    }
    return csi;
}

}  // namespace

TEST_CASE("frame assembly")
{
    Rng rng(1);
    const auto csi = random_csi(3, 7, 8, rng);
    const auto f = assemble_frame(csi);
    CHECK(f.rows() == 24);
    CHECK(f.cols() == 7);
    for (int l = 0; l < 3; ++l) {
        for (int i = 0; i < 7; ++i) {
            for (int k = 0; k < 8; ++k) CHECK(f.at(l * 8 + k, i) == csi[l][i][k]);
        }
    }

    const auto one = assemble_frame({{{{1.5, -2.0}}}});
    CHECK(one.rows() == 1);
    CHECK(one.cols() == 1);
    CHECK(one.at(0, 0) == std::complex<double>(1.5, -2.0));

    SUBCASE("permuting links permutes row blocks")
    {
        auto swapped = csi;
        std::swap(swapped[0], swapped[2]);
        const auto g = assemble_frame(swapped);
        for (int i = 0; i < 7; ++i) {
            for (int k = 0; k < 8; ++k) {
                CHECK(g.at(k, i) == f.at(16 + k, i));
                CHECK(g.at(8 + k, i) == f.at(8 + k, i));
                CHECK(g.at(16 + k, i) == f.at(k, i));
            }
        }
    }
    SUBCASE("ragged input")
    {
        auto bad = csi;
        bad[1].pop_back();
        CHECK_THROWS_AS(assemble_frame(bad), Error);
        bad = csi;
        bad[2][3].pop_back();
        CHECK_THROWS_AS(assemble_frame(bad), Error);
        CHECK_THROWS_AS(assemble_frame({}), Error);
    }
}

TEST_CASE("tensor conversion")
{
    const auto f = assemble_frame({{{{1.0, 2.0}}}});
    const auto t = to_tensor(f);
    CHECK(t.rows == 1);
    CHECK(t.cols == 1);
    CHECK(t.at(0, 0, 0) == 1.0);
    CHECK(t.at(0, 0, 1) == 2.0);

    Rng rng(2);
    const auto g = assemble_frame(random_csi(3, 7, 8, rng));
    const auto back = from_tensor(to_tensor(g), 3, 8);
    CHECK(back.data == g.data);
    CHECK_THROWS_AS(from_tensor(to_tensor(g), 2, 8), Error);

    auto real_only = random_csi(2, 3, 4, rng);
    for (auto& link : real_only) {
        for (auto& h : link) {
            for (auto& e : h) e = e.real();
        }
    }
    const auto rt = to_tensor(assemble_frame(real_only));
    for (int r = 0; r < rt.rows; ++r) {
        for (int c = 0; c < rt.cols; ++c) CHECK(rt.at(r, c, 1) == 0.0);
    }
}

TEST_CASE("normalization")
{
    FrameTensor constant{2, 2, std::vector<double>(8, 3.5)};
    const std::vector<FrameTensor> one{constant};
    const auto z = normalize(constant, compute_stats(one));
    for (double v : z.data) CHECK(v == 0.0);

    Rng rng(3);
    std::vector<FrameTensor> set;
    for (int i = 0; i < 20; ++i) set.push_back(to_tensor(assemble_frame(random_csi(3, 7, 8, rng))));
    for (auto& t : set) {
        for (std::size_t j = 0; j < t.data.size(); j += 2) t.data[j] = 4.0 * t.data[j] + 1.0;
    }
    const auto stats = compute_stats(set);
    std::vector<FrameTensor> out;
    for (const auto& t : set) out.push_back(normalize(t, stats));
    const auto check = compute_stats(out);
    for (int ch = 0; ch < 2; ++ch) {
        CHECK(std::abs(check.mean[ch]) < 1e-6);
        CHECK(std::abs(check.stddev[ch] - 1.0) < 1e-6);
    }
    CHECK(normalize(set[0], stats).data == out[0].data);
}

TEST_CASE("frame serialization")
{
    Rng rng(4);
    const auto f = assemble_frame(random_csi(3, 7, 8, rng));
    std::stringstream ss;
    write_frame(ss, f);
    const std::string bytes = ss.str();
    CHECK(bytes.size() == 4 + 2 * 4 + 24 * 7 * 16);
    CHECK(bytes.substr(0, 4) == "CSIF");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    CHECK(static_cast<unsigned char>(bytes[5]) == 0);
    CHECK(static_cast<unsigned char>(bytes[6]) == 3);
    const auto g = read_frame(ss);
    CHECK(g.links == 3);
    CHECK(g.n_antennas == 8);
    CHECK(g.n_beams == 7);
    CHECK(g.data == f.data);

    std::stringstream bad("XXXX");
    CHECK_THROWS_AS(read_frame(bad), Error);
    std::stringstream truncated(bytes.substr(0, 40));
    CHECK_THROWS_AS(read_frame(truncated), Error);
}
