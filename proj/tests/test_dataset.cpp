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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "csisense/config.hpp"
#include "csisense/dataset.hpp"
#include "csisense/error.hpp"

using namespace csisense;
using namespace csisense::dataset;

namespace {

std::filesystem::path temp_dir(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("csisense_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

// Valid bin count by direct enumeration of the margin rule.
std::size_t count_valid_centers(const channel::Scenario& s, double sigma, double pitch)
{
    const int n = static_cast<int>(std::floor(s.room_side / pitch + 1e-9));
    std::size_t count = 0;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double x = (ix + 0.5) * pitch;
            const double y = (iy + 0.5) * pitch;
            const double r = sigma / 2;
            bool ok = x >= r && y >= r && x <= s.room_side - r && y <= s.room_side - r;
            ok = ok && std::hypot(x - s.tx.x, y - s.tx.y) >= r + 0.05;
            for (const auto& rx : s.receivers) {
                ok = ok && std::hypot(x - rx.position.x, y - rx.position.y) >= r + 0.05;
            }
            count += ok ? 1 : 0;
        }
    }
    return count;
}

}  // namespace

TEST_CASE("resolution set")
{
    const auto s = config::preset(1);
    const auto a = gen_resolution_set(s, 0.8, 20, 7);
    CHECK(a.records.size() == 40);
    std::size_t targets = 0;
    for (const auto& r : a.records) {
        CHECK(r.tensor.rows == 24);
        CHECK(r.tensor.cols == 7);
        CHECK((r.hyp == Hypothesis::Target) == r.position.has_value());
        CHECK((r.hyp == Hypothesis::Target) == r.sigma.has_value());
        if (r.hyp == Hypothesis::Target) {
            ++targets;
            CHECK(r.position->x >= 0.4);
            CHECK(r.position->y >= 0.4);
            CHECK(r.position->x <= 4.6);
            CHECK(r.position->y <= 4.6);
            CHECK(placement_allowed(s, *r.position, 0.8));
        }
    }
    CHECK(targets == 20);

    const auto b = gen_resolution_set(s, 0.8, 20, 7);
    for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].tensor.data == b.records[i].tensor.data);

    CHECK_THROWS_AS(gen_resolution_set(s, 0.0, 20, 7), Error);
    CHECK_THROWS_AS(gen_resolution_set(s, -1.0, 20, 7), Error);
}

TEST_CASE("record determinism does not depend on worker count")
{
    const auto s = config::preset(2);
    setenv("CSISENSE_WORKERS", "1", 1);
    const auto serial = gen_resolution_set(s, 0.5, 12, 3);
    setenv("CSISENSE_WORKERS", "4", 1);
    const auto parallel = gen_resolution_set(s, 0.5, 12, 3);
    unsetenv("CSISENSE_WORKERS");
    for (std::size_t i = 0; i < serial.records.size(); ++i) {
        CHECK(serial.records[i].tensor.data == parallel.records[i].tensor.data);
    }
}

TEST_CASE("binned set")
{
    const auto s = config::preset(1);
    SUBCASE("valid bin count")
    {
        CHECK(valid_bins(s, 0.8, 0.25).size() == count_valid_centers(s, 0.8, 0.25));
        CHECK(valid_bins(s, 0.8, 0.25).size() <= 400);
        CHECK(valid_bins(s, 0.8, 0.5).size() == count_valid_centers(s, 0.8, 0.5));
    }
    SUBCASE("targets sit on bin centers")
    {
        const auto d = gen_binned_set(s, 0.8, 2, 0.5, 9);
        const auto bins = valid_bins(s, 0.8, 0.5);
        CHECK(d.records.size() == 4 * bins.size());
        std::size_t nulls = 0;
        for (const auto& r : d.records) {
            if (r.hyp == Hypothesis::Null) {
                ++nulls;
                continue;
            }
            const auto it = std::find_if(bins.begin(), bins.end(), [&](const Bin& b) { return b.index == r.bin; });
            REQUIRE(it != bins.end());
            CHECK(*r.position == it->center);
        }
        CHECK(nulls == 2 * bins.size());
    }
    SUBCASE("single bin")
    {
        CHECK(bin_grid(5.0, 5.0).size() == 1);
        CHECK(bin_grid(5.0, 5.0)[0].center == Point2D{2.5, 2.5});
    }
    SUBCASE("bad pitch")
    {
        CHECK_THROWS_AS(gen_binned_set(s, 0.8, 2, 0.0, 9), Error);
        CHECK_THROWS_AS(bin_grid(5.0, -1.0), Error);
    }
}

TEST_CASE("split")
{
    const auto s = config::preset(3);
    const auto d = gen_resolution_set(s, 0.8, 50, 1);
    const auto [tr, va] = split(d, 0.7, 2);
    CHECK(tr.records.size() == 70);
    CHECK(va.records.size() == 30);
    auto count = [](const Dataset& x, Hypothesis h) {
        return std::count_if(x.records.begin(), x.records.end(), [&](const SampleRecord& r) { return r.hyp == h; });
    };
    CHECK(count(tr, Hypothesis::Null) == 35);
    CHECK(count(va, Hypothesis::Target) == 15);
    std::map<std::uint64_t, int> seen;
    for (const auto& r : tr.records) seen[r.seed + (r.hyp == Hypothesis::Target ? 1ULL << 63 : 0)]++;
    for (const auto& r : va.records) seen[r.seed + (r.hyp == Hypothesis::Target ? 1ULL << 63 : 0)]++;
    CHECK(seen.size() == d.records.size());
    for (const auto& [k, n] : seen) CHECK(n == 1);

    const auto [all, none] = split(d, 1.0, 2);
    CHECK(all.records.size() == 100);
    CHECK(none.records.empty());

    const auto binned = gen_binned_set(config::preset(1), 0.8, 10, 1.0, 4);
    const auto [btr, bva] = split(binned, 0.7, 5);
    std::map<std::pair<int, int>, int> per_stratum;
    for (const auto& r : btr.records) per_stratum[{static_cast<int>(r.hyp), r.bin}]++;
    for (const auto& [k, n] : per_stratum) CHECK(n == 7);
}

TEST_CASE("save and load")
{
    const auto s = config::preset(2);
    const auto d = gen_binned_set(s, 0.8, 1, 1.0, 3);
    const auto dir = temp_dir("dataset");
    save(d, dir);
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    CHECK(std::filesystem::exists(dir / "frames.bin"));
    std::ifstream labels(dir / "labels.csv");
    std::string header;
    std::getline(labels, header);
    CHECK(header == "index,hyp,x,y,sigma,seed,bin");

    const auto e = load(dir);
    REQUIRE(e.records.size() == d.records.size());
    CHECK(e.manifest.protocol == Protocol::Coverage);
    CHECK(e.manifest.sigma == d.manifest.sigma);
    CHECK(e.manifest.grid_pitch == d.manifest.grid_pitch);
    CHECK(e.manifest.master_seed == d.manifest.master_seed);
    CHECK(e.manifest.scenario.receivers.size() == 2);
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        CHECK(e.records[i].tensor.data == d.records[i].tensor.data);
        CHECK(e.records[i].hyp == d.records[i].hyp);
        CHECK(e.records[i].seed == d.records[i].seed);
        CHECK(e.records[i].bin == d.records[i].bin);
        CHECK(e.records[i].position == d.records[i].position);
    }
    CHECK_THROWS_AS(load(temp_dir("missing")), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("placement rule")
{
    const auto s = config::preset(1);
    CHECK_FALSE(placement_allowed(s, {0.3, 2.5}, 0.8));
    CHECK_FALSE(placement_allowed(s, {0.44, 1.0}, 0.8));
    CHECK(placement_allowed(s, {2.5, 2.5}, 0.8));
    Rng rng(1);
    for (int i = 0; i < 500; ++i) CHECK(placement_allowed(s, sample_position(s, 1.2, rng), 1.2));
}
