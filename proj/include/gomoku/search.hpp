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

// Monte Carlo tree search with PUCT selection and a pluggable leaf
// evaluator. The same driver runs pure MCTS (uniform priors, random
// rollouts) and network-guided search (network priors and value).
//
// Value convention: a node's value_sum is accumulated from the point of view
// of the player to move *at that node*. A parent therefore scores a child by
// the negated child mean.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gomoku/game.hpp"
#include "gomoku/record.hpp"

namespace gomoku {

using Rng = std::mt19937_64;

// Stateless seed derivation (splitmix64 finalizer over the mixed inputs), so
// per-game and per-iteration streams are independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept {
  std::uint64_t z = base;
  for (const std::uint64_t v : {a, b}) {
    z += 0x9e3779b97f4a7c15ULL + v;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
  }
  return z;
}

struct SearchConfig {
  int n_simulations = 400;
  double c_puct = 5.0;
  double dirichlet_alpha = 0.3;
  // 0 disables root noise entirely (no random draws are made).
  double dirichlet_epsilon = 0.0;
  double temperature = 0.0;
  // Rollout length cap for pure MCTS; 0 means height x width.
  int rollout_limit = 0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (n_simulations < 1) throw ConfigError("n_simulations must be >= 1");
    if (!(c_puct > 0.0)) throw ConfigError("c_puct must be positive");
    if (!(dirichlet_alpha > 0.0)) throw ConfigError("dirichlet_alpha must be positive");
    if (!(dirichlet_epsilon >= 0.0 && dirichlet_epsilon <= 1.0)) {
      throw ConfigError("dirichlet_epsilon must be in [0, 1]");
    }
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be non-negative");
    if (rollout_limit < 0) throw ConfigError("rollout_limit must be positive (or 0 for a full board)");
  }
};

// Priors are indexed by cell, zero on illegal cells and sum to one.
// Value is in [-1, 1] from the point of view of the player to move.
struct Evaluation {
  std::vector<float> priors;
  double value = 0.0;
};

template <class E>
concept Evaluator = requires(E& e, const GameState& s, Rng& rng) {
  { e.evaluate(s, rng) } -> std::convertible_to<Evaluation>;
};

// ---------------------------------------------------------------------------
// Pure-MCTS evaluator.

// Plays uniformly random moves from `state` until the game ends or `limit`
// plies have been played (0 means unlimited). Returns +1/-1/0 for the player
// to move in `state`; hitting the limit scores 0.
inline double rollout_evaluate(const GameState& state, int limit, Rng& rng) {
  const Player me = state.to_move();
  if (state.terminal()) return reward_for(state.outcome(), me);
  GameState s = state;
  std::vector<int> empty = s.legal_indices();
  const int n = static_cast<int>(empty.size());
  const int cap = limit > 0 ? std::min(limit, n) : n;
  for (int k = 0; k < cap; ++k) {
    std::uniform_int_distribution<int> pick(k, n - 1);
    std::swap(empty[static_cast<std::size_t>(k)], empty[static_cast<std::size_t>(pick(rng))]);
    s.play_index_unchecked(empty[static_cast<std::size_t>(k)]);
    if (s.terminal()) return reward_for(s.outcome(), me);
  }
  return 0.0;
}

inline std::vector<float> uniform_priors(const GameState& state) {
  std::vector<float> p(static_cast<std::size_t>(state.config().cells()), 0.0f);
  const auto legal = state.legal_indices();
  const float u = 1.0f / static_cast<float>(legal.size());
  for (int i : legal) p[static_cast<std::size_t>(i)] = u;
  return p;
}

class RolloutEvaluator {
 public:
  explicit RolloutEvaluator(int rollout_limit = 0) : limit_(rollout_limit) {}

  Evaluation evaluate(const GameState& state, Rng& rng) const {
    return {uniform_priors(state), rollout_evaluate(state, limit_, rng)};
  }

 private:
  int limit_;
};

// Uniform priors, zero value. Stands in for an untrained network in tests.
class UniformEvaluator {
 public:
  Evaluation evaluate(const GameState& state, Rng&) const { return {uniform_priors(state), 0.0}; }
};

// ---------------------------------------------------------------------------
// Tree.

struct TreeNode {
  int cell = -1;  // move that led here; -1 at a fresh root
  float prior = 0.0f;
  int visits = 0;
  double value_sum = 0.0;
  int first_child = -1;
  int num_children = 0;
  bool expanded = false;

  double mean_value() const noexcept { return visits > 0 ? value_sum / visits : 0.0; }
};

inline double puct_score(double q, double prior, int parent_visits, int child_visits, double c_puct) noexcept {
  return q + c_puct * prior * std::sqrt(static_cast<double>(parent_visits)) / (1.0 + child_visits);
}

// Adds the leaf value to every node on a root-to-leaf path, flipping sign
// once per ply. `leaf_value` is from the leaf mover's point of view.
inline void backup(std::span<TreeNode* const> path, double leaf_value) noexcept {
  double v = leaf_value;
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    (*it)->visits += 1;
    (*it)->value_sum += v;
    v = -v;
  }
}

class SearchTree {
 public:
  SearchTree() { reset(); }

  void reset() {
    nodes_.clear();
    nodes_.emplace_back();
  }

  TreeNode& root() noexcept { return nodes_.front(); }
  const TreeNode& root() const noexcept { return nodes_.front(); }
  static constexpr int root_index() noexcept { return 0; }

  TreeNode& node(int i) noexcept { return nodes_[static_cast<std::size_t>(i)]; }
  const TreeNode& node(int i) const noexcept { return nodes_[static_cast<std::size_t>(i)]; }
  std::size_t size() const noexcept { return nodes_.size(); }

  std::span<TreeNode> children(int i) noexcept {
    const TreeNode& n = node(i);
    if (n.first_child < 0) return {};
    return std::span<TreeNode>(nodes_).subspan(static_cast<std::size_t>(n.first_child),
                                               static_cast<std::size_t>(n.num_children));
  }
  std::span<const TreeNode> children(int i) const noexcept {
    const TreeNode& n = node(i);
    if (n.first_child < 0) return {};
    return std::span<const TreeNode>(nodes_).subspan(static_cast<std::size_t>(n.first_child),
                                                     static_cast<std::size_t>(n.num_children));
  }

  // Creates one child per cell in `legal` (row-major), contiguously.
  void expand(int i, std::span<const int> legal, std::span<const float> priors) {
    const int first = static_cast<int>(nodes_.size());
    for (int cell : legal) {
      TreeNode child;
      child.cell = cell;
      child.prior = priors[static_cast<std::size_t>(cell)];
      nodes_.push_back(child);
    }
    TreeNode& n = node(i);
    n.first_child = first;
    n.num_children = static_cast<int>(legal.size());
    n.expanded = true;
  }

  // Keeps the subtree under the root child reached by `cell` and discards
  // the rest. An unexpanded root, or an unknown move, yields a fresh tree.
  void advance(int cell) {
    int keep = -1;
    for (int c = 0; c < root().num_children; ++c) {
      if (node(root().first_child + c).cell == cell) {
        keep = root().first_child + c;
        break;
      }
    }
    if (keep < 0) {
      reset();
      return;
    }
    std::vector<TreeNode> out;
    out.reserve(nodes_.size());
    out.push_back(node(keep));
    std::vector<std::pair<int, int>> queue{{keep, 0}};
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const auto [old_i, new_i] = queue[q];
      const TreeNode& src = node(old_i);
      if (src.first_child < 0) continue;
      const int first = static_cast<int>(out.size());
      for (int c = 0; c < src.num_children; ++c) {
        out.push_back(node(src.first_child + c));
        queue.emplace_back(src.first_child + c, first + c);
      }
      out[static_cast<std::size_t>(new_i)].first_child = first;
    }
    nodes_ = std::move(out);
  }

 private:
  std::vector<TreeNode> nodes_;
};

// PUCT argmax over the children of node `i`; ties go to the lowest cell.
// Returns the child's node index.
inline int select_child(const SearchTree& tree, int i, double c_puct) {
  const TreeNode& parent = tree.node(i);
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < parent.num_children; ++c) {
    const TreeNode& child = tree.node(parent.first_child + c);
    const double q = child.visits > 0 ? -child.mean_value() : 0.0;
    const double score = puct_score(q, child.prior, parent.visits, child.visits, c_puct);
    if (score > best_score) {
      best_score = score;
      best = parent.first_child + c;
    }
  }
  return best;
}

// Visit-count policy at the root: p(a) ~ N(a)^(1/t) for t > 0, one-hot on the
// most visited child (lowest cell on ties) for t = 0.
inline std::vector<float> move_probabilities(const SearchTree& tree, int cells, double temperature) {
  std::vector<float> p(static_cast<std::size_t>(cells), 0.0f);
  const auto kids = tree.children(SearchTree::root_index());
  if (kids.empty()) throw UsageError("move_probabilities on an unexpanded root");
  if (temperature <= 0.0) {
    const TreeNode* best = &kids.front();
    for (const auto& k : kids) {
      if (k.visits > best->visits) best = &k;
    }
    p[static_cast<std::size_t>(best->cell)] = 1.0f;
    return p;
  }
  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& k : kids) {
    if (k.visits > 0) max_log = std::max(max_log, std::log(static_cast<double>(k.visits)) / temperature);
  }
  if (!std::isfinite(max_log)) throw UsageError("move_probabilities on a root with no visited child");
  double total = 0.0;
  std::vector<double> w(kids.size(), 0.0);
  for (std::size_t j = 0; j < kids.size(); ++j) {
    if (kids[j].visits > 0) {
      w[j] = std::exp(std::log(static_cast<double>(kids[j].visits)) / temperature - max_log);
      total += w[j];
    }
  }
  for (std::size_t j = 0; j < kids.size(); ++j) {
    p[static_cast<std::size_t>(kids[j].cell)] = static_cast<float>(w[j] / total);
  }
  return p;
}

// Draws a cell index from a distribution over cells.
inline int sample_cell(std::span<const float> dist, Rng& rng) {
  double total = 0.0;
  for (float p : dist) total += p;
  std::uniform_real_distribution<double> u(0.0, total);
  const double x = u(rng);
  double acc = 0.0;
  int last = -1;
  for (int i = 0; i < static_cast<int>(dist.size()); ++i) {
    if (dist[static_cast<std::size_t>(i)] <= 0.0f) continue;
    acc += dist[static_cast<std::size_t>(i)];
    last = i;
    if (x < acc) return i;
  }
  return last;
}

inline int argmax_cell(std::span<const float> dist) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(dist.size()); ++i) {
    if (dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

struct SearchResult {
  std::vector<float> distribution;  // normalized root child visits, per cell
  std::vector<int> visits;          // root child visits, per cell
  double root_value = 0.0;          // root Q, mover's point of view
  int simulations = 0;              // simulations run by this call

  MoveDiagnostics diagnostics() const { return {distribution, root_value, simulations}; }
};

// Search driver owning one tree. Reuse: call advance() with each move played
// (by either side) and run() again; reset() starts over.
template <Evaluator E>
class Mcts {
 public:
  Mcts(E& evaluator, SearchConfig cfg) : eval_(&evaluator), cfg_(cfg), rng_(cfg.rng_seed) { cfg_.validate(); }

  const SearchConfig& config() const noexcept { return cfg_; }
  SearchConfig& mutable_config() noexcept { return cfg_; }
  const SearchTree& tree() const noexcept { return tree_; }
  Rng& rng() noexcept { return rng_; }

  void reset() {
    tree_.reset();
    noised_ = false;
  }

  void advance(Move m, const BoardConfig& board) {
    tree_.advance(cell_index(board, m));
    noised_ = false;
  }

  SearchResult run(const GameState& state) {
    if (state.terminal()) throw UsageError("run_search called on a finished game");
    if (tree_.root().expanded) add_root_noise();
    std::vector<int> path;
    std::vector<TreeNode*> ptrs;
    for (int sim = 0; sim < cfg_.n_simulations; ++sim) {
      simulate(state, path, ptrs);
    }
    return result(state.config().cells());
  }

 private:
  void simulate(const GameState& root_state, std::vector<int>& path, std::vector<TreeNode*>& ptrs) {
    GameState s = root_state;
    path.clear();
    int i = SearchTree::root_index();
    path.push_back(i);
    while (tree_.node(i).expanded && !s.terminal()) {
      i = select_child(tree_, i, cfg_.c_puct);
      s.play_index_unchecked(tree_.node(i).cell);
      path.push_back(i);
    }
    double value;
    if (s.terminal()) {
      value = reward_for(s.outcome(), s.to_move());
    } else {
      Evaluation ev = eval_->evaluate(s, rng_);
      const auto legal = s.legal_indices();
      tree_.expand(i, legal, ev.priors);
      value = ev.value;
      if (i == SearchTree::root_index()) add_root_noise();
    }
    ptrs.clear();
    for (int n : path) ptrs.push_back(&tree_.node(n));
    backup(ptrs, value);
  }

  void add_root_noise() {
    if (noised_ || cfg_.dirichlet_epsilon <= 0.0) return;
    noised_ = true;
    auto kids = tree_.children(SearchTree::root_index());
    if (kids.empty()) return;
    std::gamma_distribution<double> gamma(cfg_.dirichlet_alpha, 1.0);
    std::vector<double> noise(kids.size());
    double total = 0.0;
    for (auto& x : noise) {
      x = gamma(rng_);
      total += x;
    }
    if (!(total > 0.0)) return;
    const double eps = cfg_.dirichlet_epsilon;
    for (std::size_t j = 0; j < kids.size(); ++j) {
      kids[j].prior = static_cast<float>((1.0 - eps) * kids[j].prior + eps * noise[j] / total);
    }
  }

  SearchResult result(int cells) const {
    SearchResult r;
    r.visits.assign(static_cast<std::size_t>(cells), 0);
    r.distribution.assign(static_cast<std::size_t>(cells), 0.0f);
    r.simulations = cfg_.n_simulations;
    r.root_value = tree_.root().mean_value();
    long total = 0;
    for (const auto& k : tree_.children(SearchTree::root_index())) {
      r.visits[static_cast<std::size_t>(k.cell)] = k.visits;
      total += k.visits;
    }
    if (total > 0) {
      for (int c = 0; c < cells; ++c) {
        r.distribution[static_cast<std::size_t>(c)] =
            static_cast<float>(static_cast<double>(r.visits[static_cast<std::size_t>(c)]) / static_cast<double>(total));
      }
    } else {
      // A single simulation only expands the root; fall back to its priors.
      double prior_total = 0.0;
      for (const auto& k : tree_.children(SearchTree::root_index())) prior_total += k.prior;
      for (const auto& k : tree_.children(SearchTree::root_index())) {
        r.distribution[static_cast<std::size_t>(k.cell)] = static_cast<float>(k.prior / prior_total);
      }
    }
    return r;
  }

  E* eval_;
  SearchConfig cfg_;
  Rng rng_;
  SearchTree tree_;
  bool noised_ = false;
};

// One-shot search from a fresh tree.
template <Evaluator E>
SearchResult run_search(const GameState& state, E& evaluator, const SearchConfig& cfg) {
  Mcts<E> mcts(evaluator, cfg);
  return mcts.run(state);
}

}  // namespace gomoku
