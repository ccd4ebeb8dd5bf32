// Copyright 2026 The gomoku-zero Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Policy-value network.
//
//   input  4 x H x W planes (see EncodedState)
//   trunk  3x3 conv, same padding, ReLU, one layer per trunk_channels entry
//   policy 1x1 conv -> ReLU -> flatten -> fully connected to H*W -> log-softmax
//   value  1x1 conv -> ReLU -> flatten -> fully connected -> ReLU
//          -> fully connected to 1 -> tanh
//
// All parameters live in one flat buffer; `layout()` names each tensor and
// gives its row-major shape. Convolution weights are [out][in][ky][kx], which
// is the row-major form of an out x (in*9) matrix.
//
// Activations are (channels) x (batch * H * W) matrices whose column index is
// sample * H * W + cell, so a 3x3 convolution is one matrix product against
// the im2col expansion of its input.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gomoku/game.hpp"
#include "gomoku/sample.hpp"
#include "gomoku/search.hpp"

namespace gomoku {

struct NetworkArch {
  int height = 6;
  int width = 6;
  std::vector<int> trunk_channels{32, 64, 128};
  int policy_channels = 4;
  int value_channels = 2;
  int value_hidden = 64;

  static NetworkArch for_board(const BoardConfig& b) {
    NetworkArch a;
    a.height = b.height;
    a.width = b.width;
    return a;
  }

  int cells() const noexcept { return height * width; }

  void validate() const {
    if (height <= 0 || width <= 0) throw ConfigError("network board dimensions must be positive");
    if (trunk_channels.empty()) throw ConfigError("network needs at least one trunk layer");
    for (int c : trunk_channels) {
      if (c <= 0) throw ConfigError("trunk channel counts must be positive");
    }
    if (policy_channels <= 0 || value_channels <= 0 || value_hidden <= 0) {
      throw ConfigError("head widths must be positive");
    }
  }

  nlohmann::json to_json() const {
    return {{"height", height},
            {"width", width},
            {"trunk_channels", trunk_channels},
            {"policy_channels", policy_channels},
            {"value_channels", value_channels},
            {"value_hidden", value_hidden}};
  }

  static NetworkArch from_json(const nlohmann::json& j) {
    NetworkArch a;
    a.height = j.at("height").get<int>();
    a.width = j.at("width").get<int>();
    a.trunk_channels = j.at("trunk_channels").get<std::vector<int>>();
    a.policy_channels = j.at("policy_channels").get<int>();
    a.value_channels = j.at("value_channels").get<int>();
    a.value_hidden = j.at("value_hidden").get<int>();
    return a;
  }

  friend bool operator==(const NetworkArch&, const NetworkArch&) = default;
};

struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  bool weight = true;  // false for biases; only weights are L2-regularized

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

struct PolicyValueOutput {
  std::vector<float> policy;  // per cell
  float value = 0.0f;
};

struct LossBreakdown {
  double total = 0.0;
  double value_term = 0.0;
  double policy_term = 0.0;
  double regularization = 0.0;
};

template <class T>
class PolicyValueNet {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using MatMap = Eigen::Map<Matrix>;
  using ConstMatMap = Eigen::Map<const Matrix>;
  using VecMap = Eigen::Map<Vector>;
  using ConstVecMap = Eigen::Map<const Vector>;

  // Intermediate activations of one forward pass, reusable across calls.
  struct Cache {
    int batch = 0;
    std::vector<Matrix> trunk;  // trunk[0] is the input, trunk[l + 1] the output of layer l
    std::vector<Matrix> cols;   // im2col of trunk[l]
    Matrix policy_act, policy_flat, log_policy;
    Matrix value_act, value_flat, hidden, value;
  };

  explicit PolicyValueNet(NetworkArch arch) : arch_(std::move(arch)) {
    arch_.validate();
    const int hw = arch_.cells();
    int in = EncodedState::kPlanes;
    for (std::size_t l = 0; l < arch_.trunk_channels.size(); ++l) {
      const int out = arch_.trunk_channels[l];
      add("trunk." + std::to_string(l) + ".weight", out, in * 9, true);
      add("trunk." + std::to_string(l) + ".bias", out, 1, false);
      in = out;
    }
    add("policy.conv.weight", arch_.policy_channels, in, true);
    add("policy.conv.bias", arch_.policy_channels, 1, false);
    add("policy.fc.weight", hw, arch_.policy_channels * hw, true);
    add("policy.fc.bias", hw, 1, false);
    add("value.conv.weight", arch_.value_channels, in, true);
    add("value.conv.bias", arch_.value_channels, 1, false);
    add("value.fc1.weight", arch_.value_hidden, arch_.value_channels * hw, true);
    add("value.fc1.bias", arch_.value_hidden, 1, false);
    add("value.fc2.weight", 1, arch_.value_hidden, true);
    add("value.fc2.bias", 1, 1, false);
    params_.assign(total_, T(0));
  }

  const NetworkArch& arch() const noexcept { return arch_; }
  const std::vector<TensorSpec>& layout() const noexcept { return layout_; }
  std::span<T> params() noexcept { return params_; }
  std::span<const T> params() const noexcept { return params_; }
  std::size_t num_params() const noexcept { return total_; }

  // Uniform fan-in initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in)), with
  // zero biases.
  void initialize(Rng& rng) {
    for (const auto& t : layout_) {
      auto* p = params_.data() + t.offset;
      if (!t.weight) {
        std::fill(p, p + t.size(), T(0));
        continue;
      }
      const double bound = 1.0 / std::sqrt(static_cast<double>(t.cols));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (std::size_t i = 0; i < t.size(); ++i) p[i] = static_cast<T>(u(rng));
    }
  }

  // Packs encoded states into the trunk input of `cache`.
  void load_input(std::span<const EncodedState* const> batch, Cache& cache) const {
    const int hw = arch_.cells();
    const int b = static_cast<int>(batch.size());
    cache.batch = b;
    cache.trunk.resize(arch_.trunk_channels.size() + 1);
    Matrix& x = cache.trunk[0];
    x.resize(EncodedState::kPlanes, static_cast<Eigen::Index>(b) * hw);
    for (int s = 0; s < b; ++s) {
      const EncodedState& e = *batch[static_cast<std::size_t>(s)];
      if (e.height != arch_.height || e.width != arch_.width ||
          static_cast<int>(e.data.size()) != EncodedState::kPlanes * hw) {
        throw DimensionError("input is " + std::to_string(e.height) + "x" + std::to_string(e.width) +
                             " but the network expects " + std::to_string(arch_.height) + "x" +
                             std::to_string(arch_.width));
      }
      for (int p = 0; p < EncodedState::kPlanes; ++p) {
        for (int i = 0; i < hw; ++i) {
          x(p, static_cast<Eigen::Index>(s) * hw + i) = static_cast<T>(e.data[static_cast<std::size_t>(p * hw + i)]);
        }
      }
    }
  }

  // Runs the network on the input already in cache.trunk[0].
  void forward(Cache& cache) const {
    const int hw = arch_.cells();
    const Eigen::Index n = static_cast<Eigen::Index>(cache.batch) * hw;
    const std::size_t layers = arch_.trunk_channels.size();
    cache.cols.resize(layers);
    std::size_t t = 0;
    for (std::size_t l = 0; l < layers; ++l, t += 2) {
      im2col(cache.trunk[l], cache.batch, cache.cols[l]);
      Matrix& out = cache.trunk[l + 1];
      out.resize(layout_[t].rows, n);
      out.noalias() = weights(t) * cache.cols[l];
      out.colwise() += bias(t + 1);
      out = out.cwiseMax(T(0));
    }
    const Matrix& feat = cache.trunk[layers];

    cache.policy_act.resize(arch_.policy_channels, n);
    cache.policy_act.noalias() = weights(t) * feat;
    cache.policy_act.colwise() += bias(t + 1);
    cache.policy_act = cache.policy_act.cwiseMax(T(0));
    flatten(cache.policy_act, cache.batch, cache.policy_flat);
    cache.log_policy.resize(hw, cache.batch);
    cache.log_policy.noalias() = weights(t + 2) * cache.policy_flat;
    cache.log_policy.colwise() += bias(t + 3);
    for (Eigen::Index s = 0; s < cache.batch; ++s) {
      auto col = cache.log_policy.col(s);
      const T mx = col.maxCoeff();
      const T lse = mx + std::log((col.array() - mx).exp().sum());
      col.array() -= lse;
    }

    const std::size_t v = t + 4;
    cache.value_act.resize(arch_.value_channels, n);
    cache.value_act.noalias() = weights(v) * feat;
    cache.value_act.colwise() += bias(v + 1);
    cache.value_act = cache.value_act.cwiseMax(T(0));
    flatten(cache.value_act, cache.batch, cache.value_flat);
    cache.hidden.resize(arch_.value_hidden, cache.batch);
    cache.hidden.noalias() = weights(v + 2) * cache.value_flat;
    cache.hidden.colwise() += bias(v + 3);
    cache.hidden = cache.hidden.cwiseMax(T(0));
    cache.value.resize(1, cache.batch);
    cache.value.noalias() = weights(v + 4) * cache.hidden;
    cache.value.colwise() += bias(v + 5);
    cache.value = cache.value.array().tanh().matrix();
  }

  // Unmasked forward over a batch. Policies cover every cell.
  std::vector<PolicyValueOutput> forward(const std::vector<EncodedState>& batch) const {
    std::vector<const EncodedState*> ptrs;
    ptrs.reserve(batch.size());
    for (const auto& e : batch) ptrs.push_back(&e);
    Cache cache;
    load_input(ptrs, cache);
    forward(cache);
    std::vector<PolicyValueOutput> out(batch.size());
    for (std::size_t s = 0; s < batch.size(); ++s) out[s] = output(cache, static_cast<int>(s));
    return out;
  }

  PolicyValueOutput output(const Cache& cache, int s) const {
    PolicyValueOutput o;
    o.policy.resize(static_cast<std::size_t>(arch_.cells()));
    for (int i = 0; i < arch_.cells(); ++i) {
      o.policy[static_cast<std::size_t>(i)] = static_cast<float>(std::exp(cache.log_policy(i, s)));
    }
    o.value = static_cast<float>(cache.value(0, s));
    return o;
  }

  // Composite loss over a batch; when `grad` is non-null it receives the
  // gradient of the total with respect to every parameter (same layout as
  // params()).
  LossBreakdown loss(std::span<const TrainingSample> batch, double l2, std::vector<T>* grad = nullptr) const {
    if (batch.empty()) throw UsageError("loss on an empty batch");
    Cache cache;
    std::vector<const EncodedState*> ptrs;
    ptrs.reserve(batch.size());
    for (const auto& s : batch) ptrs.push_back(&s.planes);
    load_input(ptrs, cache);
    forward(cache);
    return loss_from_cache(cache, batch, l2, grad);
  }

  LossBreakdown loss_from_cache(Cache& cache, std::span<const TrainingSample> batch, double l2,
                                std::vector<T>* grad) const {
    const int hw = arch_.cells();
    const int b = cache.batch;
    const T inv_b = T(1) / static_cast<T>(b);
    Matrix target(hw, b);
    Matrix z(1, b);
    for (int s = 0; s < b; ++s) {
      const auto& smp = batch[static_cast<std::size_t>(s)];
      if (static_cast<int>(smp.pi.size()) != hw) throw DimensionError("policy target length mismatch");
      for (int i = 0; i < hw; ++i) target(i, s) = static_cast<T>(smp.pi[static_cast<std::size_t>(i)]);
      z(0, s) = static_cast<T>(smp.z);
    }
    LossBreakdown lb;
    lb.value_term = static_cast<double>((z - cache.value).array().square().sum() * inv_b);
    lb.policy_term = static_cast<double>(-(target.array() * cache.log_policy.array()).sum() * inv_b);
    double reg = 0.0;
    for (const auto& t : layout_) {
      if (t.weight) reg += static_cast<double>(ConstVecMap(params_.data() + t.offset, static_cast<Eigen::Index>(t.size())).squaredNorm());
    }
    lb.regularization = l2 * reg;
    lb.total = lb.value_term + lb.policy_term + lb.regularization;
    if (grad) backward(cache, target, z, l2, *grad);
    return lb;
  }

  // Needed by the finite-difference and overfit tests as well as training.
  void backward(Cache& cache, const Matrix& target, const Matrix& z, double l2, std::vector<T>& grad) const {
    const int hw = arch_.cells();
    const int b = cache.batch;
    const Eigen::Index n = static_cast<Eigen::Index>(b) * hw;
    const T inv_b = T(1) / static_cast<T>(b);
    grad.assign(total_, T(0));
    const std::size_t layers = arch_.trunk_channels.size();
    const std::size_t t = 2 * layers;
    const std::size_t v = t + 4;

    // Policy head: d(-sum pi log softmax)/dlogit = softmax * sum(pi) - pi.
    Matrix dlogits = cache.log_policy.array().exp().matrix();
    for (int s = 0; s < b; ++s) dlogits.col(s) *= target.col(s).sum();
    dlogits = (dlogits - target) * inv_b;
    gmat(grad, t + 2).noalias() = dlogits * cache.policy_flat.transpose();
    gvec(grad, t + 3) = dlogits.rowwise().sum();
    Matrix dflat = weights(t + 2).transpose() * dlogits;
    Matrix dact;
    unflatten(dflat, b, arch_.policy_channels, dact);
    dact.array() *= (cache.policy_act.array() > T(0)).template cast<T>();
    const Matrix& feat = cache.trunk[layers];
    gmat(grad, t).noalias() = dact * feat.transpose();
    gvec(grad, t + 1) = dact.rowwise().sum();
    Matrix dfeat = weights(t).transpose() * dact;

    // Value head.
    Matrix dv = (cache.value - z) * (T(2) * inv_b);
    dv.array() *= (T(1) - cache.value.array().square());
    gmat(grad, v + 4).noalias() = dv * cache.hidden.transpose();
    gvec(grad, v + 5) = dv.rowwise().sum();
    Matrix dh = weights(v + 4).transpose() * dv;
    dh.array() *= (cache.hidden.array() > T(0)).template cast<T>();
    gmat(grad, v + 2).noalias() = dh * cache.value_flat.transpose();
    gvec(grad, v + 3) = dh.rowwise().sum();
    Matrix dvflat = weights(v + 2).transpose() * dh;
    unflatten(dvflat, b, arch_.value_channels, dact);
    dact.array() *= (cache.value_act.array() > T(0)).template cast<T>();
    gmat(grad, v).noalias() = dact * feat.transpose();
    gvec(grad, v + 1) = dact.rowwise().sum();
    dfeat.noalias() += weights(v).transpose() * dact;

    // Trunk, last layer first.
    Matrix dz = std::move(dfeat);
    Matrix dcol;
    for (std::size_t l = layers; l-- > 0;) {
      dz.array() *= (cache.trunk[l + 1].array() > T(0)).template cast<T>();
      gmat(grad, 2 * l).noalias() = dz * cache.cols[l].transpose();
      gvec(grad, 2 * l + 1) = dz.rowwise().sum();
      if (l == 0) break;
      dcol.noalias() = weights(2 * l).transpose() * dz;
      Matrix dx(cache.trunk[l].rows(), n);
      col2im(dcol, b, static_cast<int>(cache.trunk[l].rows()), dx);
      dz = std::move(dx);
    }

    if (l2 > 0.0) {
      for (const auto& spec : layout_) {
        if (!spec.weight) continue;
        for (std::size_t i = 0; i < spec.size(); ++i) {
          grad[spec.offset + i] += static_cast<T>(2.0 * l2) * params_[spec.offset + i];
        }
      }
    }
  }

 private:
  void add(std::string name, int rows, int cols, bool weight) {
    layout_.push_back({std::move(name), rows, cols, total_, weight});
    total_ += static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  ConstMatMap weights(std::size_t k) const {
    const auto& t = layout_[k];
    return ConstMatMap(params_.data() + t.offset, t.rows, t.cols);
  }
  ConstVecMap bias(std::size_t k) const {
    const auto& t = layout_[k];
    return ConstVecMap(params_.data() + t.offset, t.rows);
  }
  MatMap gmat(std::vector<T>& g, std::size_t k) const {
    const auto& t = layout_[k];
    return MatMap(g.data() + t.offset, t.rows, t.cols);
  }
  VecMap gvec(std::vector<T>& g, std::size_t k) const {
    const auto& t = layout_[k];
    return VecMap(g.data() + t.offset, t.rows);
  }

  // x: C x (B*HW) -> cols: (C*9) x (B*HW), zero padding at the border.
  void im2col(const Matrix& x, int batch, Matrix& cols) const {
    const int h = arch_.height;
    const int w = arch_.width;
    const int hw = h * w;
    const auto c_in = static_cast<int>(x.rows());
    cols.setZero(static_cast<Eigen::Index>(c_in) * 9, static_cast<Eigen::Index>(batch) * hw);
    for (int c = 0; c < c_in; ++c) {
      const T* src = x.data() + static_cast<std::ptrdiff_t>(c) * x.cols();
      for (int k = 0; k < 9; ++k) {
        const int dy = k / 3 - 1;
        const int dx = k % 3 - 1;
        T* dst = cols.data() + static_cast<std::ptrdiff_t>(c * 9 + k) * cols.cols();
        for (int s = 0; s < batch; ++s) {
          const T* sp = src + static_cast<std::ptrdiff_t>(s) * hw;
          T* dp = dst + static_cast<std::ptrdiff_t>(s) * hw;
          for (int y = std::max(0, -dy); y < std::min(h, h - dy); ++y) {
            const int x0 = std::max(0, -dx);
            const int x1 = std::min(w, w - dx);
            for (int xx = x0; xx < x1; ++xx) dp[y * w + xx] = sp[(y + dy) * w + xx + dx];
          }
        }
      }
    }
  }

  // Adjoint of im2col.
  void col2im(const Matrix& cols, int batch, int c_in, Matrix& x) const {
    const int h = arch_.height;
    const int w = arch_.width;
    const int hw = h * w;
    x.setZero(c_in, static_cast<Eigen::Index>(batch) * hw);
    for (int c = 0; c < c_in; ++c) {
      T* dst = x.data() + static_cast<std::ptrdiff_t>(c) * x.cols();
      for (int k = 0; k < 9; ++k) {
        const int dy = k / 3 - 1;
        const int dx = k % 3 - 1;
        const T* src = cols.data() + static_cast<std::ptrdiff_t>(c * 9 + k) * cols.cols();
        for (int s = 0; s < batch; ++s) {
          const T* sp = src + static_cast<std::ptrdiff_t>(s) * hw;
          T* dp = dst + static_cast<std::ptrdiff_t>(s) * hw;
          for (int y = std::max(0, -dy); y < std::min(h, h - dy); ++y) {
            const int x0 = std::max(0, -dx);
            const int x1 = std::min(w, w - dx);
            for (int xx = x0; xx < x1; ++xx) dp[(y + dy) * w + xx + dx] += sp[y * w + xx];
          }
        }
      }
    }
  }

  // act: C x (B*HW) -> flat: (C*HW) x B, channel-major within a sample.
  void flatten(const Matrix& act, int batch, Matrix& flat) const {
    const int hw = arch_.cells();
    const auto c_n = static_cast<int>(act.rows());
    flat.resize(static_cast<Eigen::Index>(c_n) * hw, batch);
    for (int c = 0; c < c_n; ++c) {
      for (int s = 0; s < batch; ++s) {
        for (int i = 0; i < hw; ++i) flat(c * hw + i, s) = act(c, static_cast<Eigen::Index>(s) * hw + i);
      }
    }
  }

  void unflatten(const Matrix& flat, int batch, int c_n, Matrix& act) const {
    const int hw = arch_.cells();
    act.resize(c_n, static_cast<Eigen::Index>(batch) * hw);
    for (int c = 0; c < c_n; ++c) {
      for (int s = 0; s < batch; ++s) {
        for (int i = 0; i < hw; ++i) act(c, static_cast<Eigen::Index>(s) * hw + i) = flat(c * hw + i, s);
      }
    }
  }

  NetworkArch arch_;
  std::vector<TensorSpec> layout_;
  std::size_t total_ = 0;
  std::vector<T> params_;
};

// Softmax restricted to the empty cells of `state`; occupied cells get 0.
template <class T>
PolicyValueOutput masked_output(const PolicyValueNet<T>& net, const typename PolicyValueNet<T>::Cache& cache,
                                int s, const GameState& state) {
  const int hw = net.arch().cells();
  PolicyValueOutput o;
  o.policy.assign(static_cast<std::size_t>(hw), 0.0f);
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < hw; ++i) {
    if (state.at(i) == Cell::Empty) mx = std::max(mx, static_cast<double>(cache.log_policy(i, s)));
  }
  double total = 0.0;
  for (int i = 0; i < hw; ++i) {
    if (state.at(i) != Cell::Empty) continue;
    const double e = std::exp(static_cast<double>(cache.log_policy(i, s)) - mx);
    o.policy[static_cast<std::size_t>(i)] = static_cast<float>(e);
    total += e;
  }
  if (total > 0.0) {
    for (auto& p : o.policy) p = static_cast<float>(p / total);
  }
  o.value = static_cast<float>(cache.value(0, s));
  return o;
}

// Forward with legality masking, one output per state.
template <class T>
std::vector<PolicyValueOutput> forward_masked(const PolicyValueNet<T>& net, const std::vector<GameState>& states) {
  std::vector<EncodedState> enc;
  enc.reserve(states.size());
  for (const auto& s : states) enc.push_back(encode(s));
  std::vector<const EncodedState*> ptrs;
  for (const auto& e : enc) ptrs.push_back(&e);
  typename PolicyValueNet<T>::Cache cache;
  net.load_input(ptrs, cache);
  net.forward(cache);
  std::vector<PolicyValueOutput> out;
  out.reserve(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) out.push_back(masked_output(net, cache, static_cast<int>(s), states[s]));
  return out;
}

// Leaf evaluator backed by a network. Holds its own activation cache, so use
// one instance per search thread; the network itself is shared read-only.
template <class T = float>
class NetworkEvaluator {
 public:
  explicit NetworkEvaluator(const PolicyValueNet<T>& net) : net_(&net) {}

  Evaluation evaluate(const GameState& state, Rng&) {
    enc_ = encode(state);
    const EncodedState* p = &enc_;
    net_->load_input(std::span<const EncodedState* const>(&p, 1), cache_);
    net_->forward(cache_);
    PolicyValueOutput o = masked_output(*net_, cache_, 0, state);
    return {std::move(o.policy), static_cast<double>(o.value)};
  }

 private:
  const PolicyValueNet<T>* net_;
  typename PolicyValueNet<T>::Cache cache_;
  EncodedState enc_;
};

// ---------------------------------------------------------------------------
// Optimization.

template <class T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One Adam step on `batch`. Returns the loss measured before the update.
// Throws TrainingDivergence, leaving params and optimizer state untouched,
// if the loss or any gradient entry is non-finite.
template <class T>
LossBreakdown train_step(PolicyValueNet<T>& net, std::span<const TrainingSample> batch, AdamState<T>& opt,
                         double lr, double l2) {
  if (!(lr >= 0.0)) throw UsageError("learning rate must be non-negative");
  std::vector<T> grad;
  const LossBreakdown lb = net.loss(batch, l2, &grad);
  if (!std::isfinite(lb.total)) throw TrainingDivergence("non-finite loss");
  for (const T g : grad) {
    if (!std::isfinite(static_cast<double>(g))) throw TrainingDivergence("non-finite gradient");
  }
  const std::size_t n = net.num_params();
  if (opt.m.size() != n) {
    opt.m.assign(n, T(0));
    opt.v.assign(n, T(0));
    opt.step = 0;
  }
  opt.step += 1;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  const T b1 = static_cast<T>(opt.beta1);
  const T b2 = static_cast<T>(opt.beta2);
  const T step_size = static_cast<T>(lr / bc1);
  const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
  const T eps = static_cast<T>(opt.epsilon);
  auto params = net.params();
  for (std::size_t i = 0; i < n; ++i) {
    opt.m[i] = b1 * opt.m[i] + (T(1) - b1) * grad[i];
    opt.v[i] = b2 * opt.v[i] + (T(1) - b2) * grad[i] * grad[i];
    params[i] -= step_size * opt.m[i] / (std::sqrt(opt.v[i]) * inv_sqrt_bc2 + eps);
  }
  return lb;
}

}  // namespace gomoku
