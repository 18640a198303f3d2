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

#include <optional>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "csisense/baseline.hpp"
#include "csisense/config.hpp"
#include "csisense/dataset.hpp"
#include "csisense/error.hpp"
#include "csisense/geometry.hpp"
#include "csisense/metrics.hpp"
#include "csisense/sensenet.hpp"

namespace py = pybind11;
using namespace csisense;
using geometry::Point2D;

namespace {

using XY = std::pair<double, double>;

Point2D pt(const XY& p) { return {p.first, p.second}; }
XY xy(const Point2D& p) { return {p.x, p.y}; }

py::array_t<double> tensor_array(const frame::FrameTensor& t)
{
    py::array_t<double> a({t.rows, t.cols, 2});
    std::copy(t.data.begin(), t.data.end(), a.mutable_data());
    return a;
}

frame::FrameTensor tensor_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& a)
{
    if (a.ndim() != 3 || a.shape(2) != 2) throw Error(ErrorCode::ShapeMismatch, "expected an array of shape (rows, cols, 2)");
    frame::FrameTensor t{static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), {}};
    t.data.assign(a.data(), a.data() + a.size());
    return t;
}

py::array_t<double> to_array(const std::vector<double>& v)
{
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

std::vector<metrics::Drop> drops_for(const channel::Scenario& s, double sigma, std::size_t n, std::uint64_t seed)
{
    return metrics::random_drops(s, sigma, n, seed);
}

sensenet::LabeledSet examples(const dataset::Dataset& d, sensenet::Head head)
{
    return head == sensenet::Head::Detect ? sensenet::detection_examples(d) : sensenet::positioning_examples(d);
}

sensenet::Head head_from(const std::string& s)
{
    if (s == "detect") return sensenet::Head::Detect;
    if (s == "locate") return sensenet::Head::Locate;
    throw Error(ErrorCode::InvalidConfig, "head must be 'detect' or 'locate'");
}

}  // namespace

PYBIND11_MODULE(_csisense, m)
{
    m.doc() = "Passive target sensing over multistatic CSI";

    // Library errors surface as CsisenseError with the error code in `.code`.
    static py::handle error_type = PyErr_NewException("csisense.CsisenseError", PyExc_RuntimeError, nullptr);
    m.attr("CsisenseError") = py::reinterpret_borrow<py::object>(error_type);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = py::reinterpret_borrow<py::object>(error_type)(e.what());
            err.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error_type.ptr(), err.ptr());
        }
    });

    // Scenario ---------------------------------------------------------------
    py::class_<channel::Scenario>(m, "Scenario")
        .def_readonly("name", &channel::Scenario::name)
        .def_readonly("room_side", &channel::Scenario::room_side)
        .def_readonly("n_antennas", &channel::Scenario::n_antennas)
        .def_readonly("beam_angles", &channel::Scenario::beam_angles)
        .def_property_readonly("links", &channel::Scenario::links)
        .def_property_readonly("tx", [](const channel::Scenario& s) { return xy(s.tx); })
        .def_property_readonly("receivers",
                               [](const channel::Scenario& s) {
                                   std::vector<std::tuple<double, double, double>> out;
                                   for (const auto& r : s.receivers) {
                                       out.emplace_back(r.position.x, r.position.y, r.boresight);
                                   }
                                   return out;
                               })
        .def_property(
            "snr_db", [](const channel::Scenario& s) { return s.channel.snr_db; },
            [](channel::Scenario& s, double v) { s.channel.snr_db = v; })
        .def_property(
            "los", [](const channel::Scenario& s) { return s.channel.los; },
            [](channel::Scenario& s, bool v) { s.channel.los = v; })
        .def_property(
            "scatter_coeff", [](const channel::Scenario& s) { return s.channel.scatter_coeff; },
            [](channel::Scenario& s, double v) { s.channel.scatter_coeff = v; })
        .def_property(
            "per_record",
            [](const channel::Scenario& s) { return s.channel.environment == channel::EnvironmentMode::PerRecord; },
            [](channel::Scenario& s, bool v) {
                s.channel.environment = v ? channel::EnvironmentMode::PerRecord : channel::EnvironmentMode::Fixed;
            })
        .def("validate", &channel::Scenario::validate)
        .def("to_json", [](const channel::Scenario& s) { return config::scenario_to_json(s).dump(2); })
        .def("__repr__", [](const channel::Scenario& s) {
            return "<Scenario " + s.name + " L=" + std::to_string(s.links()) + ">";
        });

    m.def("preset", &config::preset, py::arg("which"), "Built-in deployment 1 (L=3), 2 (L=2) or 3 (L=1).");
    m.def("load_scenario", &config::load_scenario, py::arg("path"));
    m.def(
        "scenario_from_json", [](const std::string& text) { return config::scenario_from_json(nlohmann::json::parse(text)); },
        py::arg("text"));

    // Geometry and channel ---------------------------------------------------
    m.def(
        "in_shadow",
        [](const XY& x, const XY& viewpoint, const XY& center, double diameter) {
            return geometry::in_shadow(pt(x), pt(viewpoint), {pt(center), diameter});
        },
        py::arg("x"), py::arg("viewpoint"), py::arg("center"), py::arg("diameter"));
    m.def(
        "simulate_frame",
        [](const channel::Scenario& s, std::uint64_t seed, std::optional<std::tuple<double, double, double>> target) {
            std::optional<geometry::Target> t;
            if (target) t = geometry::Target{{std::get<0>(*target), std::get<1>(*target)}, std::get<2>(*target)};
            const auto f = dataset::simulate_frame(s, t, seed);
            py::array_t<std::complex<double>> a({f.rows(), f.cols()});
            std::copy(f.data.begin(), f.data.end(), a.mutable_data());
            return a;
        },
        py::arg("scenario"), py::arg("seed"), py::arg("target") = py::none(),
        "CSI frame (L*N_r, N_b); target is (x, y, diameter) or None.");

    // Datasets ---------------------------------------------------------------
    py::class_<dataset::Dataset>(m, "Dataset")
        .def("__len__", [](const dataset::Dataset& d) { return d.records.size(); })
        .def_property_readonly("scenario", [](const dataset::Dataset& d) { return d.manifest.scenario; })
        .def_property_readonly("protocol", [](const dataset::Dataset& d) { return to_string(d.manifest.protocol); })
        .def_property_readonly("sigma", [](const dataset::Dataset& d) { return d.manifest.sigma; })
        .def("tensors",
             [](const dataset::Dataset& d) {
                 if (d.records.empty()) return py::array_t<double>(std::vector<py::ssize_t>{0, 0, 0, 2});
                 const auto& first = d.records.front().tensor;
                 py::array_t<double> a({static_cast<py::ssize_t>(d.records.size()), py::ssize_t{first.rows},
                                        py::ssize_t{first.cols}, py::ssize_t{2}});
                 double* out = a.mutable_data();
                 for (const auto& r : d.records) out = std::copy(r.tensor.data.begin(), r.tensor.data.end(), out);
                 return a;
             })
        .def("labels",
             [](const dataset::Dataset& d) {
                 std::vector<double> hyp, x, y, sigma, bin;
                 std::vector<std::uint64_t> seed;
                 const double nan = std::numeric_limits<double>::quiet_NaN();
                 for (const auto& r : d.records) {
                     hyp.push_back(r.hyp == dataset::Hypothesis::Target ? 1.0 : 0.0);
                     x.push_back(r.position ? r.position->x : nan);
                     y.push_back(r.position ? r.position->y : nan);
                     sigma.push_back(r.sigma.value_or(nan));
                     bin.push_back(r.bin);
                     seed.push_back(r.seed);
                 }
                 py::dict out;
                 out["hyp"] = to_array(hyp);
                 out["x"] = to_array(x);
                 out["y"] = to_array(y);
                 out["sigma"] = to_array(sigma);
                 out["bin"] = to_array(bin);
                 out["seed"] = py::array_t<std::uint64_t>(static_cast<py::ssize_t>(seed.size()), seed.data());
                 return out;
             })
        .def("save", [](const dataset::Dataset& d, const std::filesystem::path& dir) { dataset::save(d, dir); },
             py::arg("dir"));

    m.def("gen_resolution_set", &dataset::gen_resolution_set, py::arg("scenario"), py::arg("sigma"), py::arg("n"),
          py::arg("seed"), py::call_guard<py::gil_scoped_release>());
    m.def(
        "gen_binned_set",
        [](const channel::Scenario& s, double sigma, std::size_t n_per_bin, double pitch, std::uint64_t seed,
           const std::string& protocol, bool jitter) {
            return dataset::gen_binned_set(s, sigma, n_per_bin, pitch, seed, dataset::protocol_from_string(protocol),
                                           jitter);
        },
        py::arg("scenario"), py::arg("sigma"), py::arg("n_per_bin"), py::arg("pitch"), py::arg("seed"),
        py::arg("protocol") = "coverage", py::arg("jitter") = false);
    m.def("load_dataset", &dataset::load, py::arg("dir"));
    m.def("split", &dataset::split, py::arg("data"), py::arg("train_fraction"), py::arg("seed"));

    // Models -----------------------------------------------------------------
    py::class_<sensenet::Model>(m, "Model")
        .def_property_readonly("head", [](const sensenet::Model& mdl) { return to_string(mdl.params.arch.head); })
        .def_property_readonly("n_params", [](const sensenet::Model& mdl) { return mdl.params.values.size(); })
        .def("save", [](const sensenet::Model& mdl, const std::filesystem::path& p) { sensenet::save_model(mdl, p); },
             py::arg("path"))
        .def(
            "predict",
            [](const sensenet::Model& mdl, const py::array_t<double, py::array::c_style | py::array::forcecast>& a)
                -> py::object {
                const auto t = tensor_from(a);
                if (mdl.params.arch.head == sensenet::Head::Detect) return py::float_(sensenet::predict_detect(mdl, t));
                return py::cast(xy(sensenet::predict_locate(mdl, t)));
            },
            py::arg("tensor"), "Detection probability or (x, y) for one (rows, cols, 2) tensor.");
    m.def("load_model", &sensenet::load_model, py::arg("path"));
    m.def(
        "train",
        [](const dataset::Dataset& train_set, const dataset::Dataset& val_set, const std::string& head, int epochs,
           std::size_t batch_size, double lr, int patience, std::uint64_t seed) {
            sensenet::Architecture arch;
            arch.head = head_from(head);
            sensenet::TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.learning_rate = lr;
            cfg.patience = patience;
            cfg.seed = seed;
            sensenet::TrainResult res;
            {
                py::gil_scoped_release release;
                res = sensenet::train(examples(train_set, arch.head), examples(val_set, arch.head), arch, cfg);
            }
            py::list log;
            for (const auto& e : res.log) {
                py::dict row;
                row["epoch"] = e.epoch;
                row["train_loss"] = e.train_loss;
                row["val_loss"] = e.val_loss;
                row["val_metric"] = e.val_metric;
                log.append(row);
            }
            return py::make_tuple(res.model, log);
        },
        py::arg("train_set"), py::arg("val_set"), py::arg("head") = "detect", py::arg("epochs") = 40,
        py::arg("batch_size") = 32, py::arg("lr") = 1e-3, py::arg("patience") = 8, py::arg("seed") = 1,
        "Returns (model, per-epoch log).");

    // Evaluation -------------------------------------------------------------
    m.def(
        "resolution_curve",
        [](const sensenet::Model& mdl, const channel::Scenario& s, std::vector<double> sigmas, std::size_t drops,
           double gamma, std::uint64_t seed) {
            const auto c = metrics::resolution_curve(mdl, s, sigmas, drops, gamma, seed);
            std::vector<double> acc;
            for (const auto& p : c.points) acc.push_back(p.accuracy);
            py::dict out;
            out["sigma"] = to_array(sigmas);
            out["accuracy"] = to_array(acc);
            out["resolution"] = c.resolution ? py::cast(*c.resolution) : py::none();
            return out;
        },
        py::arg("model"), py::arg("scenario"), py::arg("sigmas"), py::arg("drops"), py::arg("gamma") = 0.9,
        py::arg("seed") = 1);
    m.def(
        "detection_accuracy",
        [](const sensenet::Model& mdl, const channel::Scenario& s, double sigma, std::size_t drops, std::uint64_t seed) {
            const auto d = drops_for(s, sigma, drops, seed);
            return metrics::accuracy_score(metrics::detection_counts(mdl, s, d));
        },
        py::arg("model"), py::arg("scenario"), py::arg("sigma"), py::arg("drops"), py::arg("seed") = 1);
    m.def(
        "coverage_map",
        [](const sensenet::Model& mdl, const channel::Scenario& s, double sigma, std::size_t drops, double pitch,
           std::uint64_t seed) {
            const auto map = metrics::coverage_map(mdl, s, sigma, drops, pitch, seed);
            py::array_t<double> a({map.n, map.n});
            double* out = a.mutable_data();
            for (const auto& b : map.bins) out[b.iy * map.n + b.ix] = b.accuracy;
            return a;
        },
        py::arg("model"), py::arg("scenario"), py::arg("sigma"), py::arg("drops"), py::arg("pitch") = 0.5,
        py::arg("seed") = 1, "Accuracy per bin indexed [iy, ix]; NaN where the target does not fit.");
    m.def(
        "positioning_errors",
        [](const sensenet::Model& mdl, const channel::Scenario& s, double sigma, std::size_t drops, std::uint64_t seed) {
            return to_array(metrics::positioning_errors(mdl, s, drops_for(s, sigma, drops, seed)));
        },
        py::arg("model"), py::arg("scenario"), py::arg("sigma"), py::arg("drops"), py::arg("seed") = 1);
    m.def(
        "baseline_errors",
        [](const channel::Scenario& s, double sigma, std::size_t drops, std::uint64_t seed, const std::string& variant) {
            baseline::BeamBank bank;
            if (variant == "swept") {
                bank = baseline::swept_bank(s);
            } else if (variant == "overlapped") {
                bank = baseline::overlapped_bank();
            } else {
                throw Error(ErrorCode::InvalidConfig, "variant must be 'swept' or 'overlapped'");
            }
            return to_array(metrics::baseline_errors(s, drops_for(s, sigma, drops, seed), bank));
        },
        py::arg("scenario"), py::arg("sigma"), py::arg("drops"), py::arg("seed") = 1, py::arg("variant") = "swept");
    m.def(
        "error_summary",
        [](std::vector<double> errors) {
            const auto s = metrics::summarize_errors(std::move(errors));
            py::dict out;
            out["mean"] = s.mean;
            out["median"] = s.median;
            out["p90"] = s.p90;
            out["layer_cake_mean"] = metrics::layer_cake_mean(s);
            return out;
        },
        py::arg("errors"));
}
