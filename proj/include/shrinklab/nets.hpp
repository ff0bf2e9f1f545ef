// Copyright (c) 2026 shrinklab contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHRINKLAB_NETS_HPP_
#define SHRINKLAB_NETS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shrinklab/checkpoint.hpp"
#include "shrinklab/rng.hpp"

namespace shrinklab {

using Vector = std::vector<double>;

struct Matrix {
  int rows = 0;
  int cols = 0;
  Vector data;  // row-major

  static Matrix zeros(int rows, int cols) {
    Matrix m;
    m.rows = rows;
    m.cols = cols;
    m.data.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    return m;
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  bool operator==(const Matrix& other) const = default;
};

enum class HiddenActivation { kTanh };
enum class OutputHead { kLogits, kScalar };

inline std::string to_string(HiddenActivation a) {
  switch (a) {
    case HiddenActivation::kTanh:
      return "tanh";
  }
  return "?";
}

inline std::string to_string(OutputHead h) {
  return h == OutputHead::kLogits ? "logits" : "scalar";
}

struct MlpConfig {
  std::vector<int> layer_sizes;  // input, hidden..., output
  HiddenActivation hidden = HiddenActivation::kTanh;
  OutputHead head = OutputHead::kLogits;
  std::uint64_t init_seed = 0;
};

// Numerically safe softmax: max-subtracted, so any finite logits work.
inline Vector softmax(const Vector& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  const double m = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

struct ForwardTrace {
  // activations[0] is the input; activations[l] is the output of layer l
  // (tanh for hidden layers, raw for the last one).
  std::vector<Vector> activations;

  const Vector& output() const { return activations.back(); }
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Vector input;
};

// Plain feed-forward network: affine layers with tanh hidden units and a
// raw (logits or single-scalar) output layer. Parameters are public values;
// training mutates them through the optimizer below.
class Mlp {
 public:
  Mlp() = default;

  static Mlp initialize(const MlpConfig& cfg) {
    if (cfg.layer_sizes.size() < 2) {
      throw std::invalid_argument("mlp: need at least input and output sizes");
    }
    for (int s : cfg.layer_sizes) {
      if (s < 1) throw std::invalid_argument("mlp: layer sizes must be >= 1");
    }
    if (cfg.head == OutputHead::kScalar && cfg.layer_sizes.back() != 1) {
      throw std::invalid_argument("mlp: scalar head needs output size 1");
    }
    Mlp net;
    net.cfg_ = cfg;
    const std::size_t layers = cfg.layer_sizes.size() - 1;
    net.weights.reserve(layers);
    net.biases.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      const int in = cfg.layer_sizes[l];
      const int out = cfg.layer_sizes[l + 1];
      Matrix w = Matrix::zeros(out, in);
      Rng rng(derive_seed(cfg.init_seed, l));
      const double scale = 1.0 / std::sqrt(static_cast<double>(in));
      for (auto& v : w.data) v = rng.uniform(-scale, scale);
      net.weights.push_back(std::move(w));
      net.biases.emplace_back(static_cast<std::size_t>(out), 0.0);
    }
    return net;
  }

  const MlpConfig& config() const { return cfg_; }
  int input_size() const { return cfg_.layer_sizes.front(); }
  int output_size() const { return cfg_.layer_sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      n += weights[l].data.size() + biases[l].size();
    }
    return n;
  }

  ForwardTrace forward_trace(const Vector& input) const {
    if (static_cast<int>(input.size()) != input_size()) {
      throw std::invalid_argument(
          "mlp forward: input size " + std::to_string(input.size()) +
          ", expected " + std::to_string(input_size()));
    }
    ForwardTrace trace;
    trace.activations.reserve(weights.size() + 1);
    trace.activations.push_back(input);
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const Matrix& w = weights[l];
      const Vector& x = trace.activations.back();
      Vector z = biases[l];
      for (int r = 0; r < w.rows; ++r) {
        const double* row = w.data.data() + static_cast<std::size_t>(r) * w.cols;
        double acc = 0.0;
        for (int c = 0; c < w.cols; ++c) acc += row[c] * x[static_cast<std::size_t>(c)];
        z[static_cast<std::size_t>(r)] += acc;
      }
      if (l + 1 < weights.size()) {
        for (auto& v : z) v = std::tanh(v);
      }
      trace.activations.push_back(std::move(z));
    }
    return trace;
  }

  Vector forward(const Vector& input) const {
    return forward_trace(input).output();
  }

  double forward_scalar(const Vector& input) const {
    if (cfg_.head != OutputHead::kScalar) {
      throw std::logic_error("mlp: forward_scalar on a non-scalar head");
    }
    return forward(input)[0];
  }

  // Flat parameter order: W0 (row-major), b0, W1, b1, ...
  Vector flat_parameters() const {
    Vector out;
    out.reserve(parameter_count());
    for (std::size_t l = 0; l < weights.size(); ++l) {
      out.insert(out.end(), weights[l].data.begin(), weights[l].data.end());
      out.insert(out.end(), biases[l].begin(), biases[l].end());
    }
    return out;
  }

  void set_flat_parameters(const Vector& flat) {
    if (flat.size() != parameter_count()) {
      throw std::invalid_argument("mlp: flat parameter size mismatch");
    }
    std::size_t off = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  weights[l].data.size(), weights[l].data.begin());
      off += weights[l].data.size();
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  biases[l].size(), biases[l].begin());
      off += biases[l].size();
    }
  }

  std::string save(const nlohmann::json& extra_header = nlohmann::json::object()) const {
    nlohmann::json header = extra_header;
    header["type"] = "mlp";
    header["layer_sizes"] = cfg_.layer_sizes;
    header["hidden"] = to_string(cfg_.hidden);
    header["head"] = to_string(cfg_.head);
    header["init_seed"] = cfg_.init_seed;
    return encode_checkpoint(header, flat_parameters());
  }

  static Mlp load(const std::string& bytes,
                  nlohmann::json* header_out = nullptr) {
    const DecodedCheckpoint ckpt = decode_checkpoint(bytes);
    if (ckpt.header.at("type") != "mlp") {
      throw std::runtime_error("mlp: wrong checkpoint type");
    }
    MlpConfig cfg;
    cfg.layer_sizes = ckpt.header.at("layer_sizes").get<std::vector<int>>();
    if (ckpt.header.at("hidden") != "tanh") {
      throw std::runtime_error("mlp: unknown hidden activation");
    }
    cfg.head = ckpt.header.at("head") == "scalar" ? OutputHead::kScalar
                                                  : OutputHead::kLogits;
    cfg.init_seed = ckpt.header.value("init_seed", std::uint64_t{0});
    Mlp net = Mlp::initialize(cfg);
    net.set_flat_parameters(ckpt.params);
    if (header_out) *header_out = ckpt.header;
    return net;
  }

  std::vector<Matrix> weights;
  std::vector<Vector> biases;

 private:
  MlpConfig cfg_;
};

// Exact gradients of sum_i upstream[i] * output[i] with respect to every
// parameter and to the input, given a cached forward pass.
inline Gradients backward(const Mlp& net, const ForwardTrace& trace,
                          const Vector& upstream) {
  if (static_cast<int>(upstream.size()) != net.output_size()) {
    throw std::invalid_argument("mlp backward: upstream size mismatch");
  }
  const std::size_t layers = net.layer_count();
  Gradients grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);
  Vector delta = upstream;  // gradient w.r.t. the current layer's output
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& w = net.weights[l];
    const Vector& a_in = trace.activations[l];
    // Hidden layers expose tanh outputs; fold the derivative in first.
    if (l + 1 < layers) {
      const Vector& a_out = trace.activations[l + 1];
      for (std::size_t i = 0; i < delta.size(); ++i) {
        delta[i] *= 1.0 - a_out[i] * a_out[i];
      }
    }
    Matrix& dw = grads.weights[l];
    dw = Matrix::zeros(w.rows, w.cols);
    for (int r = 0; r < w.rows; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      double* out_row = dw.data.data() + static_cast<std::size_t>(r) * w.cols;
      for (int c = 0; c < w.cols; ++c) out_row[c] = d * a_in[static_cast<std::size_t>(c)];
    }
    grads.biases[l] = delta;
    Vector next(static_cast<std::size_t>(w.cols), 0.0);
    for (int r = 0; r < w.rows; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      const double* row = w.data.data() + static_cast<std::size_t>(r) * w.cols;
      for (int c = 0; c < w.cols; ++c) next[static_cast<std::size_t>(c)] += d * row[c];
    }
    delta = std::move(next);
  }
  grads.input = std::move(delta);
  return grads;
}

inline void accumulate(Gradients& into, const Gradients& from) {
  if (into.weights.empty()) {
    into = from;
    return;
  }
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    for (std::size_t i = 0; i < into.weights[l].data.size(); ++i) {
      into.weights[l].data[i] += from.weights[l].data[i];
    }
    for (std::size_t i = 0; i < into.biases[l].size(); ++i) {
      into.biases[l][i] += from.biases[l][i];
    }
  }
  for (std::size_t i = 0; i < into.input.size() && i < from.input.size(); ++i) {
    into.input[i] += from.input[i];
  }
}

inline void scale(Gradients& grads, double factor) {
  for (auto& w : grads.weights) {
    for (auto& v : w.data) v *= factor;
  }
  for (auto& b : grads.biases) {
    for (auto& v : b) v *= factor;
  }
  for (auto& v : grads.input) v *= factor;
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive-moment optimizer over a network's flat parameter layout.
class AdamState {
 public:
  AdamState() = default;

  AdamState(std::size_t parameter_count, const AdamConfig& cfg)
      : cfg_(cfg),
        first_moment_(parameter_count, 0.0),
        second_moment_(parameter_count, 0.0) {}

  const AdamConfig& config() const { return cfg_; }
  std::int64_t step_count() const { return step_; }

  // One update on `net` along the loss gradient `grads` (descent).
  // Non-finite gradients abort with the offending parameter path.
  void step(Mlp& net, const Gradients& grads, const std::string& net_name) {
    if (first_moment_.size() != net.parameter_count()) {
      throw std::invalid_argument("adam: state size mismatch for " + net_name);
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    std::size_t off = 0;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      update_span(net.weights[l].data, grads.weights[l].data, off, bc1, bc2,
                  net_name + ": layer " + std::to_string(l) + " weights");
      off += net.weights[l].data.size();
      update_span(net.biases[l], grads.biases[l], off, bc1, bc2,
                  net_name + ": layer " + std::to_string(l) + " biases");
      off += net.biases[l].size();
    }
  }

 private:
  void update_span(Vector& params, const Vector& grads, std::size_t offset,
                   double bc1, double bc2, const std::string& path) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i];
      if (!std::isfinite(g)) {
        throw std::runtime_error("adam: non-finite gradient at " + path +
                                 "[" + std::to_string(i) + "]");
      }
      double& m = first_moment_[offset + i];
      double& v = second_moment_[offset + i];
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      params[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }

  AdamConfig cfg_;
  std::int64_t step_ = 0;
  Vector first_moment_;
  Vector second_moment_;
};

// ---------------------------------------------------------------------------
// Finite-difference checking. The oracle side only ever calls forward(), so
// it stays independent of backward().
// ---------------------------------------------------------------------------

// Central differences of `f` with respect to every parameter of `net`.
inline Vector finite_difference_gradient(
    Mlp& net, const std::function<double(const Mlp&)>& f, double h = 1e-5) {
  Vector flat = net.flat_parameters();
  Vector out(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + h;
    net.set_flat_parameters(flat);
    const double up = f(net);
    flat[i] = saved - h;
    net.set_flat_parameters(flat);
    const double down = f(net);
    flat[i] = saved;
    out[i] = (up - down) / (2.0 * h);
  }
  net.set_flat_parameters(flat);
  return out;
}

// Central differences of `f` with respect to an input vector.
inline Vector finite_difference_input_gradient(
    const std::function<double(const Vector&)>& f, const Vector& input,
    double h = 1e-5) {
  Vector x = input;
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

// Worst per-component relative difference, floored at `floor` so that
// finite-difference noise on near-zero components does not dominate.
inline double max_relative_error(const Vector& a, const Vector& b,
                                 double floor = 1e-6) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("max_relative_error: size mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

inline Vector flatten(const Gradients& grads) {
  Vector out;
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    out.insert(out.end(), grads.weights[l].data.begin(),
               grads.weights[l].data.end());
    out.insert(out.end(), grads.biases[l].begin(), grads.biases[l].end());
  }
  return out;
}

}  // namespace shrinklab

#endif  // SHRINKLAB_NETS_HPP_
