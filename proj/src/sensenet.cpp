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

#include "csisense/sensenet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>

#include "binary_io.hpp"
#include "csisense/error.hpp"
#include "csisense/parallel.hpp"
#include "csisense/rng.hpp"

namespace csisense::sensenet {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using RowVecMap = Eigen::Map<Eigen::RowVectorXd>;
using ConstRowVecMap = Eigen::Map<const Eigen::RowVectorXd>;

// Samples per gradient chunk. Fixed so the summation tree does not depend on
// the worker count.
constexpr std::size_t kChunk = 8;

double activate(Activation a, double z) { return a == Activation::ReLU ? (z > 0.0 ? z : 0.0) : std::tanh(z); }

double activate_grad(Activation a, double z, double out)
{
    return a == Activation::ReLU ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - out * out;
}

double sigmoid(double z)
{
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Activations and intermediates of one forward pass, reused across samples.
struct Workspace {
    std::vector<double> col1, z1, a1, col2, z2, a2, pooled, z3, a3, out;
    std::vector<int> argmax;
    // backward scratch
    std::vector<double> dz3, dpooled, da2, dz2, dcol2, da1, dz1;
};

void im2col(const double* in, int rows, int cols, int channels, int k, std::vector<double>& col)
{
    const int pad = k / 2;
    const std::size_t width = static_cast<std::size_t>(k) * k * channels;
    col.assign(static_cast<std::size_t>(rows) * cols * width, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            double* dst = col.data() + (static_cast<std::size_t>(r) * cols + c) * width;
            for (int ky = 0; ky < k; ++ky) {
                const int ir = r + ky - pad;
                if (ir < 0 || ir >= rows) continue;
                for (int kx = 0; kx < k; ++kx) {
                    const int ic = c + kx - pad;
                    if (ic < 0 || ic >= cols) continue;
                    const double* src = in + (static_cast<std::size_t>(ir) * cols + ic) * channels;
                    std::copy(src, src + channels, dst + (static_cast<std::size_t>(ky) * k + kx) * channels);
                }
            }
        }
    }
}

void col2im_add(const std::vector<double>& dcol, int rows, int cols, int channels, int k, std::vector<double>& din)
{
    const int pad = k / 2;
    const std::size_t width = static_cast<std::size_t>(k) * k * channels;
    din.assign(static_cast<std::size_t>(rows) * cols * channels, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double* src = dcol.data() + (static_cast<std::size_t>(r) * cols + c) * width;
            for (int ky = 0; ky < k; ++ky) {
                const int ir = r + ky - pad;
                if (ir < 0 || ir >= rows) continue;
                for (int kx = 0; kx < k; ++kx) {
                    const int ic = c + kx - pad;
                    if (ic < 0 || ic >= cols) continue;
                    double* dst = din.data() + (static_cast<std::size_t>(ir) * cols + ic) * channels;
                    const double* s = src + (static_cast<std::size_t>(ky) * k + kx) * channels;
                    for (int ch = 0; ch < channels; ++ch) dst[ch] += s[ch];
                }
            }
        }
    }
}

// z = col * W + b, a = act(z)
void conv_forward(const std::vector<double>& col, const double* w, const double* b, int positions, int width,
                  int filters, Activation act, std::vector<double>& z, std::vector<double>& a)
{
    z.resize(static_cast<std::size_t>(positions) * filters);
    a.resize(z.size());
    ConstMatMap C(col.data(), positions, width);
    ConstMatMap W(w, width, filters);
    MatMap Z(z.data(), positions, filters);
    Z.noalias() = C * W;
    Z.rowwise() += ConstRowVecMap(b, filters);
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = activate(act, z[i]);
}

void check_input(const Architecture& arch, const frame::FrameTensor& input)
{
    if (input.rows != arch.in_rows || input.cols != arch.in_cols ||
        input.data.size() != static_cast<std::size_t>(arch.in_rows) * arch.in_cols * arch.in_channels) {
        throw Error(ErrorCode::ShapeMismatch, "input " + std::to_string(input.rows) + "x" + std::to_string(input.cols) +
                                                  " does not match model input " + std::to_string(arch.in_rows) +
                                                  "x" + std::to_string(arch.in_cols));
    }
}

void forward(const ModelParams& p, const double* input, Workspace& ws)
{
    const Architecture& a = p.arch;
    const Layout L(a);
    const double* v = p.values.data();
    const int hw = a.in_rows * a.in_cols;
    const int k2 = a.kernel * a.kernel;

    im2col(input, a.in_rows, a.in_cols, a.in_channels, a.kernel, ws.col1);
    conv_forward(ws.col1, v + L.conv1_w, v + L.conv1_b, hw, k2 * a.in_channels, a.conv1_filters, a.activation, ws.z1,
                 ws.a1);
    im2col(ws.a1.data(), a.in_rows, a.in_cols, a.conv1_filters, a.kernel, ws.col2);
    conv_forward(ws.col2, v + L.conv2_w, v + L.conv2_b, hw, k2 * a.conv1_filters, a.conv2_filters, a.activation,
                 ws.z2, ws.a2);

    // 2x2 max pool, stride 2; ties resolve to the first element in scan order.
    const int pr = a.pooled_rows();
    const int pc = a.pooled_cols();
    const int f2 = a.conv2_filters;
    ws.pooled.resize(static_cast<std::size_t>(pr) * pc * f2);
    ws.argmax.resize(ws.pooled.size());
    for (int r = 0; r < pr; ++r) {
        for (int c = 0; c < pc; ++c) {
            for (int f = 0; f < f2; ++f) {
                int best = -1;
                double best_val = -std::numeric_limits<double>::infinity();
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const int idx = ((2 * r + dy) * a.in_cols + (2 * c + dx)) * f2 + f;
                        if (ws.a2[idx] > best_val) {
                            best_val = ws.a2[idx];
                            best = idx;
                        }
                    }
                }
                const std::size_t o = (static_cast<std::size_t>(r) * pc + c) * f2 + f;
                ws.pooled[o] = best_val;
                ws.argmax[o] = best;
            }
        }
    }

    const int d = a.flat_size();
    const int u = a.dense_units;
    ws.z3.resize(u);
    ws.a3.resize(u);
    RowVecMap Z3(ws.z3.data(), u);
    Z3.noalias() = ConstRowVecMap(ws.pooled.data(), d) * ConstMatMap(v + L.dense_w, d, u);
    Z3 += ConstRowVecMap(v + L.dense_b, u);
    for (int i = 0; i < u; ++i) ws.a3[i] = activate(a.activation, ws.z3[i]);

    const int o = a.outputs();
    ws.out.resize(o);
    RowVecMap Out(ws.out.data(), o);
    Out.noalias() = ConstRowVecMap(ws.a3.data(), u) * ConstMatMap(v + L.head_w, u, o);
    Out += ConstRowVecMap(v + L.head_b, o);
}

// Accumulates d(loss)/d(params) into g given d(loss)/d(out).
void backward(const ModelParams& p, Workspace& ws, const double* dout, double* g)
{
    const Architecture& a = p.arch;
    const Layout L(a);
    const double* v = p.values.data();
    const int hw = a.in_rows * a.in_cols;
    const int k2 = a.kernel * a.kernel;
    const int u = a.dense_units;
    const int o = a.outputs();
    const int d = a.flat_size();

    ConstRowVecMap dOut(dout, o);
    MatMap(g + L.head_w, u, o).noalias() += ConstVecMap(ws.a3.data(), u) * dOut;
    RowVecMap(g + L.head_b, o) += dOut;

    ws.dz3.resize(u);
    VecMap dz3(ws.dz3.data(), u);
    dz3.noalias() = ConstMatMap(v + L.head_w, u, o) * dOut.transpose();
    for (int i = 0; i < u; ++i) ws.dz3[i] *= activate_grad(a.activation, ws.z3[i], ws.a3[i]);

    MatMap(g + L.dense_w, d, u).noalias() += ConstVecMap(ws.pooled.data(), d) * dz3.transpose();
    VecMap(g + L.dense_b, u) += dz3;

    ws.dpooled.resize(d);
    VecMap(ws.dpooled.data(), d).noalias() = ConstMatMap(v + L.dense_w, d, u) * dz3;

    ws.da2.assign(ws.a2.size(), 0.0);
    for (int i = 0; i < d; ++i) ws.da2[ws.argmax[i]] += ws.dpooled[i];
    ws.dz2.resize(ws.da2.size());
    for (std::size_t i = 0; i < ws.da2.size(); ++i) {
        ws.dz2[i] = ws.da2[i] * activate_grad(a.activation, ws.z2[i], ws.a2[i]);
    }

    const int w2 = k2 * a.conv1_filters;
    ConstMatMap dZ2(ws.dz2.data(), hw, a.conv2_filters);
    ConstMatMap C2(ws.col2.data(), hw, w2);
    MatMap(g + L.conv2_w, w2, a.conv2_filters).noalias() += C2.transpose() * dZ2;
    RowVecMap(g + L.conv2_b, a.conv2_filters) += dZ2.colwise().sum();

    ws.dcol2.resize(static_cast<std::size_t>(hw) * w2);
    MatMap(ws.dcol2.data(), hw, w2).noalias() = dZ2 * ConstMatMap(v + L.conv2_w, w2, a.conv2_filters).transpose();
    col2im_add(ws.dcol2, a.in_rows, a.in_cols, a.conv1_filters, a.kernel, ws.da1);
    ws.dz1.resize(ws.da1.size());
    for (std::size_t i = 0; i < ws.da1.size(); ++i) {
        ws.dz1[i] = ws.da1[i] * activate_grad(a.activation, ws.z1[i], ws.a1[i]);
    }

    const int w1 = k2 * a.in_channels;
    ConstMatMap dZ1(ws.dz1.data(), hw, a.conv1_filters);
    ConstMatMap C1(ws.col1.data(), hw, w1);
    MatMap(g + L.conv1_w, w1, a.conv1_filters).noalias() += C1.transpose() * dZ1;
    RowVecMap(g + L.conv1_b, a.conv1_filters) += dZ1.colwise().sum();
}

// Per-sample loss; writes d(loss)/d(out) into dout.
double sample_loss(LossKind kind, const std::vector<double>& out, const double* target, double* dout)
{
    if (kind == LossKind::Bce) {
        const double y = target[0];
        const double p = sigmoid(out[0]);
        const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
        dout[0] = (p > kProbClamp && p < 1.0 - kProbClamp) ? p - y : 0.0;
        return -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double e = out[i] - target[i];
        loss += e * e;
        dout[i] = 2.0 * e;
    }
    return loss;
}

std::size_t target_dim(LossKind kind) { return kind == LossKind::Bce ? 1 : 2; }

LossKind loss_for(Head h) { return h == Head::Detect ? LossKind::Bce : LossKind::Mse; }

// Sums buffers[1..] into buffers[0] pairwise in a fixed tree.
void pairwise_reduce(std::vector<std::vector<double>>& buffers)
{
    for (std::size_t step = 1; step < buffers.size(); step *= 2) {
        for (std::size_t i = 0; i + step < buffers.size(); i += 2 * step) {
            auto& dst = buffers[i];
            const auto& src = buffers[i + step];
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
        }
    }
}

// Mean loss over a set (no gradients), chunked like loss_and_grads.
double mean_loss(const ModelParams& p, const std::vector<frame::FrameTensor>& inputs, const std::vector<double>& targets,
                 LossKind kind, std::size_t workers)
{
    const std::size_t n = inputs.size();
    if (n == 0) return 0.0;
    const std::size_t dim = target_dim(kind);
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> sums(chunks, 0.0);
    parallel_for(
        chunks,
        [&](std::size_t c) {
            Workspace ws;
            double dout[2];
            for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
                forward(p, inputs[i].data.data(), ws);
                sums[c] += sample_loss(kind, ws.out, targets.data() + i * dim, dout);
            }
        },
        workers);
    return std::accumulate(sums.begin(), sums.end(), 0.0) / static_cast<double>(n);
}

}  // namespace

std::string to_string(Head h) { return h == Head::Detect ? "detect" : "locate"; }

void Architecture::validate() const
{
    if (in_rows < 2 || in_cols < 2 || in_channels < 1) {
        throw Error(ErrorCode::ShapeMismatch, "input must be at least 2x2 with one channel");
    }
    if (kernel < 1 || kernel % 2 == 0) throw Error(ErrorCode::ShapeMismatch, "kernel size must be odd");
    if (conv1_filters < 1 || conv2_filters < 1 || dense_units < 1) {
        throw Error(ErrorCode::ShapeMismatch, "layer sizes must be positive");
    }
}

Layout::Layout(const Architecture& a)
{
    const std::size_t k2 = static_cast<std::size_t>(a.kernel) * a.kernel;
    std::size_t off = 0;
    auto take = [&](std::size_t n) {
        const std::size_t at = off;
        off += n;
        return at;
    };
    conv1_w = take(k2 * a.in_channels * a.conv1_filters);
    conv1_b = take(a.conv1_filters);
    conv2_w = take(k2 * a.conv1_filters * a.conv2_filters);
    conv2_b = take(a.conv2_filters);
    dense_w = take(static_cast<std::size_t>(a.flat_size()) * a.dense_units);
    dense_b = take(a.dense_units);
    head_w = take(static_cast<std::size_t>(a.dense_units) * a.outputs());
    head_b = take(a.outputs());
    total = off;
}

ModelParams::ModelParams(const Architecture& a) : arch(a), values(Layout(a).total, 0.0) { a.validate(); }

ModelParams glorot_init(const Architecture& arch, std::uint64_t seed)
{
    ModelParams p(arch);
    const Layout L(arch);
    Rng rng(seed);
    auto fill = [&](std::size_t offset, std::size_t count, double fan_in, double fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (std::size_t i = 0; i < count; ++i) p.values[offset + i] = rng.uniform(-limit, limit);
    };
    const double k2 = static_cast<double>(arch.kernel) * arch.kernel;
    fill(L.conv1_w, L.conv1_b - L.conv1_w, k2 * arch.in_channels, k2 * arch.conv1_filters);
    fill(L.conv2_w, L.conv2_b - L.conv2_w, k2 * arch.conv1_filters, k2 * arch.conv2_filters);
    fill(L.dense_w, L.dense_b - L.dense_w, arch.flat_size(), arch.dense_units);
    fill(L.head_w, L.head_b - L.head_w, arch.dense_units, arch.outputs());
    return p;
}

std::vector<double> forward_raw(const ModelParams& params, const frame::FrameTensor& input)
{
    check_input(params.arch, input);
    Workspace ws;
    forward(params, input.data.data(), ws);
    return ws.out;
}

double forward_detect(const ModelParams& params, const frame::FrameTensor& input)
{
    if (params.arch.head != Head::Detect) throw Error(ErrorCode::ShapeMismatch, "model has no detection head");
    return sigmoid(forward_raw(params, input)[0]);
}

geometry::Point2D forward_locate(const ModelParams& params, const frame::FrameTensor& input)
{
    if (params.arch.head != Head::Locate) throw Error(ErrorCode::ShapeMismatch, "model has no position head");
    const auto out = forward_raw(params, input);
    return {out[0], out[1]};
}

LayerTrace forward_trace(const ModelParams& params, const frame::FrameTensor& input)
{
    check_input(params.arch, input);
    Workspace ws;
    forward(params, input.data.data(), ws);
    return {ws.z1, ws.a1, ws.z2, ws.a2, ws.pooled, ws.z3, ws.a3, ws.out, ws.argmax};
}

LayerGrads backward_trace(const ModelParams& params, const frame::FrameTensor& input, std::span<const double> d_out)
{
    check_input(params.arch, input);
    if (d_out.size() != static_cast<std::size_t>(params.arch.outputs())) {
        throw Error(ErrorCode::ShapeMismatch, "output gradient has the wrong size");
    }
    Workspace ws;
    forward(params, input.data.data(), ws);
    LayerGrads g;
    g.params.assign(params.values.size(), 0.0);
    backward(params, ws, d_out.data(), g.params.data());
    g.d_z1 = ws.dz1;
    g.d_a2 = ws.da2;
    g.d_z2 = ws.dz2;
    g.d_z3 = ws.dz3;
    return g;
}

LossGrad loss_and_grads(const ModelParams& params, const Batch& batch, LossKind kind, std::size_t workers)
{
    const std::size_t n = batch.size();
    const std::size_t dim = target_dim(kind);
    if (n == 0) throw Error(ErrorCode::ShapeMismatch, "empty batch");
    if (batch.targets.size() != n * dim || static_cast<std::size_t>(params.arch.outputs()) != dim) {
        throw Error(ErrorCode::ShapeMismatch, "targets do not match the loss kind or head");
    }
    for (const auto* in : batch.inputs) check_input(params.arch, *in);

    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> grads(chunks);
    std::vector<double> losses(chunks, 0.0);
    parallel_for(
        chunks,
        [&](std::size_t c) {
            Workspace ws;
            grads[c].assign(params.values.size(), 0.0);
            double dout[2];
            for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
                forward(params, batch.inputs[i]->data.data(), ws);
                losses[c] += sample_loss(kind, ws.out, batch.targets.data() + i * dim, dout);
                backward(params, ws, dout, grads[c].data());
            }
        },
        workers);
    pairwise_reduce(grads);

    LossGrad out;
    out.grad = std::move(grads.front());
    const double inv = 1.0 / static_cast<double>(n);
    for (double& g : out.grad) g *= inv;
    out.loss = std::accumulate(losses.begin(), losses.end(), 0.0) * inv;
    return out;
}

double predict_detect(const Model& model, const frame::FrameTensor& raw_input)
{
    return forward_detect(model.params, frame::normalize(raw_input, model.stats));
}

geometry::Point2D predict_locate(const Model& model, const frame::FrameTensor& raw_input)
{
    return forward_locate(model.params, frame::normalize(raw_input, model.stats));
}

LabeledSet detection_examples(const dataset::Dataset& data)
{
    LabeledSet set;
    for (const auto& r : data.records) {
        set.inputs.push_back(r.tensor);
        set.targets.push_back(r.hyp == dataset::Hypothesis::Target ? 1.0 : 0.0);
    }
    return set;
}

LabeledSet positioning_examples(const dataset::Dataset& data)
{
    LabeledSet set;
    for (const auto& r : data.records) {
        if (r.hyp != dataset::Hypothesis::Target) continue;
        set.inputs.push_back(r.tensor);
        set.targets.push_back(r.position->x);
        set.targets.push_back(r.position->y);
    }
    return set;
}

double evaluate_metric(const Model& model, const LabeledSet& set)
{
    const std::size_t n = set.inputs.size();
    if (n == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (model.params.arch.head == Head::Detect) {
            const bool predicted = predict_detect(model, set.inputs[i]) > 0.5;
            acc += (predicted == (set.targets[i] > 0.5)) ? 1.0 : 0.0;
        } else {
            const auto est = predict_locate(model, set.inputs[i]);
            acc += std::hypot(est.x - set.targets[2 * i], est.y - set.targets[2 * i + 1]);
        }
    }
    return acc / static_cast<double>(n);
}

TrainResult train(const LabeledSet& train_set, const LabeledSet& val, const Architecture& arch_in,
                  const TrainConfig& config)
{
    if (train_set.inputs.empty()) throw Error(ErrorCode::InvalidSize, "empty training set");
    if (!(config.learning_rate >= 0.0) || config.batch_size < 1) {
        throw Error(ErrorCode::InvalidConfig, "learning rate must be >= 0 and batch size >= 1");
    }
    Architecture arch = arch_in;
    arch.in_rows = train_set.inputs.front().rows;
    arch.in_cols = train_set.inputs.front().cols;
    arch.validate();
    const LossKind kind = loss_for(arch.head);
    const std::size_t dim = target_dim(kind);
    if (train_set.targets.size() != train_set.inputs.size() * dim || val.targets.size() != val.inputs.size() * dim) {
        throw Error(ErrorCode::ShapeMismatch, "labels do not match the head");
    }

    TrainResult result;
    Model& model = result.model;
    model.stats = frame::compute_stats(train_set.inputs);
    std::vector<frame::FrameTensor> x_train;
    std::vector<frame::FrameTensor> x_val;
    for (const auto& t : train_set.inputs) x_train.push_back(frame::normalize(t, model.stats));
    for (const auto& t : val.inputs) x_val.push_back(frame::normalize(t, model.stats));

    ModelParams params = glorot_init(arch, config.seed);
    if (arch.head == Head::Locate) {
        // Start the linear head at the mean label.
        const Layout L(arch);
        for (std::size_t d = 0; d < dim; ++d) {
            double mean = 0.0;
            for (std::size_t i = 0; i < x_train.size(); ++i) mean += train_set.targets[i * dim + d];
            params.values[L.head_b + d] = mean / static_cast<double>(x_train.size());
        }
    }

    std::vector<double> m(params.values.size(), 0.0);
    std::vector<double> v(params.values.size(), 0.0);
    std::vector<std::size_t> order(x_train.size());
    std::iota(order.begin(), order.end(), 0);
    std::int64_t step = 0;

    double best_loss = std::numeric_limits<double>::infinity();
    model.params = params;
    int since_best = 0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng shuffler(stream_seed(config.seed, static_cast<std::uint64_t>(epoch)));
        shuffler.shuffle(order.begin(), order.end());

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            Batch batch;
            for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i) {
                batch.inputs.push_back(&x_train[order[i]]);
                for (std::size_t d = 0; d < dim; ++d) batch.targets.push_back(train_set.targets[order[i] * dim + d]);
            }
            const LossGrad lg = loss_and_grads(params, batch, kind, config.workers);
            if (!std::isfinite(lg.loss)) {
                throw Error(ErrorCode::NonFiniteLoss, "loss became non-finite in epoch " + std::to_string(epoch));
            }
            loss_sum += lg.loss * static_cast<double>(batch.size());

            ++step;
            const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
            for (std::size_t j = 0; j < params.values.size(); ++j) {
                const double g = lg.grad[j];
                m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g;
                v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g * g;
                params.values[j] -= config.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + config.epsilon);
            }
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = loss_sum / static_cast<double>(order.size());
        const bool has_val = !x_val.empty();
        entry.val_loss = has_val ? mean_loss(params, x_val, val.targets, kind, config.workers) : entry.train_loss;
        if (!std::isfinite(entry.train_loss) || !std::isfinite(entry.val_loss)) {
            throw Error(ErrorCode::NonFiniteLoss, "non-finite loss after epoch " + std::to_string(epoch));
        }
        if (has_val) {
            const Model current{params, model.stats};
            entry.val_metric = evaluate_metric(current, val);
        }
        result.log.push_back(entry);

        if (entry.val_loss < best_loss) {
            best_loss = entry.val_loss;
            model.params = params;
            result.best_epoch = epoch;
            since_best = 0;
        } else if (config.patience > 0 && ++since_best >= config.patience) {
            break;
        }
    }
    if (result.best_epoch == 0) {
        model.params = params;
    }
    return result;
}

void write_model(std::ostream& out, const Model& model)
{
    const auto& a = model.params.arch;
    binary::put_magic(out, "CSNN");
    binary::put<std::uint16_t>(out, kModelVersion);
    for (int field : {a.in_rows, a.in_cols, a.in_channels, a.kernel, a.conv1_filters, a.conv2_filters,
                      a.dense_units, static_cast<int>(a.head), static_cast<int>(a.activation)}) {
        binary::put<std::uint16_t>(out, static_cast<std::uint16_t>(field));
    }
    for (int ch = 0; ch < 2; ++ch) {
        binary::put<double>(out, model.stats.mean[ch]);
        binary::put<double>(out, model.stats.stddev[ch]);
    }
    binary::put<std::uint64_t>(out, model.params.values.size());
    for (double v : model.params.values) binary::put<double>(out, v);
    if (!out) throw Error(ErrorCode::Io, "failed to write model");
}

Model read_model(std::istream& in)
{
    binary::expect_magic(in, "CSNN");
    const auto version = binary::get<std::uint16_t>(in);
    if (version != kModelVersion) throw Error(ErrorCode::Io, "unsupported model version " + std::to_string(version));
    Architecture a;
    a.in_rows = binary::get<std::uint16_t>(in);
    a.in_cols = binary::get<std::uint16_t>(in);
    a.in_channels = binary::get<std::uint16_t>(in);
    a.kernel = binary::get<std::uint16_t>(in);
    a.conv1_filters = binary::get<std::uint16_t>(in);
    a.conv2_filters = binary::get<std::uint16_t>(in);
    a.dense_units = binary::get<std::uint16_t>(in);
    const auto head = binary::get<std::uint16_t>(in);
    const auto act = binary::get<std::uint16_t>(in);
    if (head > 1 || act > 1) throw Error(ErrorCode::Io, "bad architecture descriptor");
    a.head = static_cast<Head>(head);
    a.activation = static_cast<Activation>(act);

    Model model;
    for (int ch = 0; ch < 2; ++ch) {
        model.stats.mean[ch] = binary::get<double>(in);
        model.stats.stddev[ch] = binary::get<double>(in);
    }
    try {
        model.params = ModelParams(a);
    } catch (const Error& e) {
        throw Error(ErrorCode::Io, std::string("bad architecture descriptor: ") + e.what());
    }
    const auto count = binary::get<std::uint64_t>(in);
    if (count != model.params.values.size()) throw Error(ErrorCode::Io, "parameter count mismatch");
    for (double& v : model.params.values) v = binary::get<double>(in);
    return model;
}

void save_model(const Model& model, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    write_model(out, model);
}

Model load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open model " + path.string());
    return read_model(in);
}

void write_log_csv(std::ostream& out, const std::vector<EpochLog>& log)
{
    out << "epoch,train_loss,val_loss,val_metric\n";
    out.precision(10);
    for (const auto& e : log) {
        out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_metric << '\n';
    }
}

}  // namespace csisense::sensenet
