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

// Central finite-difference check of the analytic loss gradient. Only the
// loss value (forward pass) is used on the numeric side.

#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gomoku/network.hpp"

namespace gradcheck {

struct Report {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_relative = 0.0;
  std::string worst_tensor;
};

// Random positions on a small board with random legal targets.
inline std::vector<gomoku::TrainingSample> random_batch(const gomoku::BoardConfig& cfg, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<gomoku::TrainingSample> out;
  while (static_cast<int>(out.size()) < n) {
    gomoku::GameState s(cfg);
    const int plies = static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.cells() / 2));
    for (int k = 0; k < plies && !s.terminal(); ++k) {
      const auto moves = s.legal_moves();
      s = s.apply_move(moves[rng() % moves.size()]);
    }
    if (s.terminal()) continue;
    gomoku::TrainingSample smp;
    smp.planes = gomoku::encode(s);
    smp.pi.assign(static_cast<std::size_t>(cfg.cells()), 0.0f);
    std::uniform_real_distribution<float> u(0.05f, 1.0f);
    float total = 0;
    for (int i : s.legal_indices()) total += smp.pi[static_cast<std::size_t>(i)] = u(rng);
    for (auto& p : smp.pi) p /= total;
    smp.z = static_cast<float>(static_cast<int>(rng() % 3) - 1);
    out.push_back(std::move(smp));
  }
  return out;
}

// Compares every parameter's analytic gradient with a central difference.
// Entry passes when |a - n| <= tol * max(|a|, |n|) or |a - n| <= abs_floor.
inline Report check(gomoku::PolicyValueNet<double>& net, const std::vector<gomoku::TrainingSample>& batch, double l2,
                    double tol, double step = 1e-6, double abs_floor = 1e-9) {
  std::vector<double> grad;
  net.loss(batch, l2, &grad);
  Report r;
  auto params = net.params();
  for (const auto& t : net.layout()) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::size_t k = t.offset + i;
      const double saved = params[k];
      params[k] = saved + step;
      const double up = net.loss(batch, l2).total;
      params[k] = saved - step;
      const double down = net.loss(batch, l2).total;
      params[k] = saved;
      const double numeric = (up - down) / (2 * step);
      const double diff = std::abs(numeric - grad[k]);
      const double scale = std::max(std::abs(numeric), std::abs(grad[k]));
      const double rel = scale > 0 ? diff / scale : 0.0;
      ++r.checked;
      if (diff > abs_floor && rel > tol) ++r.failures;
      if (diff > abs_floor && rel > r.worst_relative) {
        r.worst_relative = rel;
        r.worst_tensor = t.name;
      }
    }
  }
  return r;
}

// Zero biases put many pre-activations exactly on a ReLU kink, where a
// central difference is meaningless; give every bias a random offset.
inline void randomize_biases(gomoku::PolicyValueNet<double>& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (const auto& t : net.layout()) {
    if (t.weight) continue;
    for (std::size_t i = 0; i < t.size(); ++i) net.params()[t.offset + i] = u(rng);
  }
}

inline gomoku::NetworkArch tiny_arch() {
  gomoku::NetworkArch a;
  a.height = 4;
  a.width = 4;
  a.trunk_channels = {2, 2};
  a.policy_channels = 2;
  a.value_channels = 2;
  a.value_hidden = 4;
  return a;
}

}  // namespace gradcheck
