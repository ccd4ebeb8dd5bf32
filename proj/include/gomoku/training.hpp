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

// Self-play reinforcement loop: generate games with the current network,
// store symmetry-augmented positions in a replay buffer, take a few
// optimizer steps, repeat.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gomoku/checkpoint.hpp"
#include "gomoku/network.hpp"
#include "gomoku/record.hpp"
#include "gomoku/sample.hpp"
#include "gomoku/search.hpp"

namespace gomoku {

struct TrainConfig {
  int games_per_iteration = 10;
  int sims_per_move = 400;
  int temperature_moves = 8;  // plies sampled at t = 1 before switching to t = 0
  int batch_size = 512;
  int steps_per_iteration = 5;
  int buffer_capacity = 10000;
  int checkpoint_every = 10;
  int total_iterations = 300;
  std::uint64_t rng_seed = 0;
  double learning_rate = 2e-3;
  double l2 = 1e-4;
  double c_puct = 5.0;
  double dirichlet_alpha = 0.3;
  double dirichlet_epsilon = 0.25;
  int workers = 1;

  void validate(const BoardConfig& board) const {
    const auto positive = [](int v, const char* name) {
      if (v < 1) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(games_per_iteration, "games_per_iteration");
    positive(sims_per_move, "sims_per_move");
    positive(temperature_moves, "temperature_moves");
    positive(batch_size, "batch_size");
    positive(steps_per_iteration, "steps_per_iteration");
    positive(buffer_capacity, "buffer_capacity");
    positive(checkpoint_every, "checkpoint_every");
    positive(total_iterations, "total_iterations");
    positive(workers, "workers");
    if (temperature_moves > board.cells()) throw ConfigError("temperature_moves exceeds the number of cells");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(l2 >= 0.0)) throw ConfigError("l2 must be non-negative");
    search_config(0).validate();
  }

  // Search settings for one self-play game.
  SearchConfig search_config(std::uint64_t seed) const {
    SearchConfig s;
    s.n_simulations = sims_per_move;
    s.c_puct = c_puct;
    s.dirichlet_alpha = dirichlet_alpha;
    s.dirichlet_epsilon = dirichlet_epsilon;
    s.rng_seed = seed;
    return s;
  }
};

// ---------------------------------------------------------------------------
// Self-play.

struct SelfPlayGame {
  std::vector<TrainingSample> samples;
  Outcome outcome = Outcome::ongoing();
  GameRecord record;
};

inline SelfPlayGame self_play_episode(const PolicyValueNet<float>& net, const BoardConfig& board,
                                      const TrainConfig& cfg, Rng& rng) {
  NetworkEvaluator<float> evaluator(net);
  Mcts mcts(evaluator, cfg.search_config(rng()));
  GameState s(board);
  SelfPlayGame game;
  game.record.config = board;
  std::vector<Player> movers;
  while (!s.terminal()) {
    const SearchResult r = mcts.run(s);
    const bool visited = std::any_of(r.visits.begin(), r.visits.end(), [](int v) { return v > 0; });
    const double t = s.ply() < cfg.temperature_moves ? 1.0 : 0.0;
    const std::vector<float> probs = visited ? move_probabilities(mcts.tree(), board.cells(), t) : r.distribution;
    const int cell = t > 0.0 ? sample_cell(probs, rng) : argmax_cell(probs);
    game.samples.push_back({encode(s), r.distribution, 0.0f});
    movers.push_back(s.to_move());
    const Move m = cell_move(board, cell);
    game.record.moves.push_back(m);
    game.record.search.push_back(r.diagnostics());
    s.play_index_unchecked(cell);
    mcts.advance(m, board);
  }
  game.outcome = s.outcome();
  game.record.outcome = game.outcome;
  for (std::size_t i = 0; i < game.samples.size(); ++i) {
    game.samples[i].z = static_cast<float>(reward_for(game.outcome, movers[i]));
  }
  return game;
}

// The 8 dihedral images of a sample (identity first). Non-square boards only
// admit the identity here.
inline std::vector<TrainingSample> augment(const TrainingSample& sample) {
  const BoardConfig cfg{sample.planes.height, sample.planes.width, 1};
  if (!cfg.square()) return {sample};
  std::vector<TrainingSample> out;
  out.reserve(kAllSymmetries.size());
  for (const Symmetry sym : kAllSymmetries) {
    out.push_back({transform(sample.planes, sym), transform_policy(cfg, sample.pi, sym), sample.z});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replay buffer.

// Bounded FIFO; appends evict the oldest samples. Safe for concurrent use.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("buffer capacity must be positive");
  }

  std::size_t capacity() const noexcept { return capacity_; }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return samples_.size();
  }

  void add(std::span<const TrainingSample> batch) {
    std::lock_guard lock(mu_);
    for (const auto& s : batch) {
      if (samples_.size() == capacity_) samples_.pop_front();
      samples_.push_back(s);
    }
  }

  // Element i counted from the oldest.
  TrainingSample at(std::size_t i) const {
    std::lock_guard lock(mu_);
    return samples_.at(i);
  }

  // Uniform draw of min(n, size) distinct samples.
  std::vector<TrainingSample> sample(std::size_t n, Rng& rng) const {
    std::lock_guard lock(mu_);
    std::vector<std::size_t> idx(samples_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    n = std::min(n, idx.size());
    std::vector<TrainingSample> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
      std::swap(idx[k], idx[pick(rng)]);
      out.push_back(samples_[idx[k]]);
    }
    return out;
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<TrainingSample> samples_;
};

// ---------------------------------------------------------------------------
// Training loop.

struct IterationReport {
  int iteration = 0;
  int games = 0;
  double mean_game_length = 0.0;
  LossBreakdown loss;  // mean over the iteration's optimizer steps
  std::size_t buffer_size = 0;
  double wall_seconds = 0.0;
  double learning_rate = 0.0;
  int p1_wins = 0;
  int p2_wins = 0;
  int draws = 0;

  nlohmann::json to_json() const {
    return {{"iteration", iteration},
            {"games", games},
            {"mean_game_length", mean_game_length},
            {"loss", {{"total", loss.total}, {"value", loss.value_term}, {"policy", loss.policy_term},
                      {"regularization", loss.regularization}}},
            {"buffer_size", buffer_size},
            {"wall_seconds", wall_seconds},
            {"learning_rate", learning_rate},
            {"p1_wins", p1_wins},
            {"p2_wins", p2_wins},
            {"draws", draws}};
  }

  std::string summary() const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "iter %4d  games %d  len %.1f  loss %.4f (v %.4f p %.4f r %.4f)  buffer %zu  lr %.2e  %.1fs",
                  iteration, games, mean_game_length, loss.total, loss.value_term, loss.policy_term,
                  loss.regularization, buffer_size, learning_rate, wall_seconds);
    return buf;
  }
};

struct TrainingOptions {
  BoardConfig board = kBoard6x6;
  std::optional<NetworkArch> arch;  // defaults to NetworkArch::for_board(board)
  TrainConfig train;
  std::filesystem::path checkpoint_dir;
  std::filesystem::path records_dir;  // empty: no game records
  std::filesystem::path metrics_log;  // empty: no metrics log
  std::optional<std::filesystem::path> resume;
  const std::atomic<bool>* stop = nullptr;
  std::function<void(const IterationReport&)> on_report;
};

struct TrainingResult {
  PolicyValueNet<float> net;
  AdamState<float> optimizer;
  std::vector<IterationReport> reports;
  std::filesystem::path final_checkpoint;
  int last_iteration = 0;
  bool interrupted = false;
};

// One optimizer step that halves `lr` and retries on divergence. Gives up
// with a diagnostic once `divergences` (shared across the run) exceeds 3.
inline LossBreakdown train_step_with_backoff(PolicyValueNet<float>& net, std::span<const TrainingSample> batch,
                                             AdamState<float>& opt, double& lr, int& divergences, double l2,
                                             int iteration) {
  for (;;) {
    try {
      return train_step(net, batch, opt, lr, l2);
    } catch (const TrainingDivergence& e) {
      if (++divergences > 3) {
        throw TrainingDivergence("training diverged at iteration " + std::to_string(iteration) + " after 3 " +
                                 "learning-rate halvings (lr " + std::to_string(lr) + "): " + e.what());
      }
      lr /= 2.0;
    }
  }
}

inline std::filesystem::path iteration_checkpoint_path(const std::filesystem::path& dir, int iteration) {
  char name[32];
  std::snprintf(name, sizeof name, "iter_%04d.ckpt", iteration);
  return dir / name;
}

inline std::filesystem::path latest_checkpoint_path(const std::filesystem::path& dir) { return dir / "latest.ckpt"; }

inline TrainingResult run_training(const TrainingOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const BoardConfig board = opts.board;
  board.validate();
  const TrainConfig& cfg = opts.train;
  cfg.validate(board);
  if (opts.checkpoint_dir.empty()) throw ConfigError("checkpoint_dir is required for training");

  const NetworkArch arch = opts.arch.value_or(NetworkArch::for_board(board));
  TrainingResult result{PolicyValueNet<float>(arch), {}, {}, {}, 0, false};
  double lr = cfg.learning_rate;
  int divergences = 0;
  int start = 1;

  const auto extra = [&](int iteration) {
    return nlohmann::json{{"iteration", iteration}, {"learning_rate", lr}, {"divergences", divergences},
                          {"rng_seed", cfg.rng_seed}};
  };

  if (opts.resume) {
    Checkpoint ck = load_checkpoint(*opts.resume, board);
    result.net = std::move(ck.net);
    if (ck.optimizer) result.optimizer = std::move(*ck.optimizer);
    start = ck.extra.value("iteration", 0) + 1;
    lr = ck.extra.value("learning_rate", lr);
    divergences = ck.extra.value("divergences", 0);
  }
  // Nothing touches the filesystem until the resume checkpoint has loaded.
  std::filesystem::create_directories(opts.checkpoint_dir);
  if (!opts.records_dir.empty()) std::filesystem::create_directories(opts.records_dir);
  if (!opts.metrics_log.empty() && opts.metrics_log.has_parent_path()) {
    std::filesystem::create_directories(opts.metrics_log.parent_path());
  }
  if (!opts.resume) {
    Rng init(derive_seed(cfg.rng_seed, 0x1417));
    result.net.initialize(init);
    save_checkpoint(iteration_checkpoint_path(opts.checkpoint_dir, 0), board, result.net, nullptr, extra(0));
  }
  result.last_iteration = start - 1;

  const auto stopping = [&] { return opts.stop != nullptr && opts.stop->load(); };
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  const std::filesystem::path records_file = opts.records_dir.empty() ? "" : opts.records_dir / "selfplay.jsonl";

  for (int it = start; it <= cfg.total_iterations; ++it) {
    if (stopping()) {
      result.interrupted = true;
      break;
    }
    const auto t0 = Clock::now();

    // Games run in parallel; results land in per-index slots so the buffer
    // order and every seed are independent of thread scheduling.
    std::vector<std::optional<SelfPlayGame>> games(static_cast<std::size_t>(cfg.games_per_iteration));
    std::atomic<int> next{0};
    const auto worker = [&] {
      for (int g = next++; g < cfg.games_per_iteration; g = next++) {
        if (stopping()) return;
        Rng rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(g)));
        games[static_cast<std::size_t>(g)] = self_play_episode(result.net, board, cfg, rng);
      }
    };
    const int nthreads = std::min(cfg.workers, cfg.games_per_iteration);
    if (nthreads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    }
    if (stopping()) {
      result.interrupted = true;
      break;
    }

    IterationReport rep;
    rep.iteration = it;
    long plies = 0;
    std::ofstream records;
    if (!records_file.empty()) records.open(records_file, std::ios::app);
    for (std::size_t g = 0; g < games.size(); ++g) {
      SelfPlayGame& game = *games[g];
      plies += static_cast<long>(game.record.moves.size());
      if (game.outcome.is_win()) {
        (game.outcome.winner() == Player::P1 ? rep.p1_wins : rep.p2_wins) += 1;
      } else {
        rep.draws += 1;
      }
      for (const auto& s : game.samples) {
        const auto images = augment(s);
        buffer.add(images);
      }
      if (records.is_open()) {
        game.record.meta = {{"source", "selfplay"}, {"iteration", it}, {"game", g}};
        write_record(records, game.record);
      }
    }
    rep.games = cfg.games_per_iteration;
    rep.mean_game_length = static_cast<double>(plies) / cfg.games_per_iteration;

    Rng batch_rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(it), 0xba7c4));
    LossBreakdown sum;
    for (int step = 0; step < cfg.steps_per_iteration; ++step) {
      const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), batch_rng);
      const LossBreakdown lb = train_step_with_backoff(result.net, batch, result.optimizer, lr, divergences, cfg.l2, it);
      sum.total += lb.total;
      sum.value_term += lb.value_term;
      sum.policy_term += lb.policy_term;
      sum.regularization += lb.regularization;
    }
    const double steps = cfg.steps_per_iteration;
    rep.loss = {sum.total / steps, sum.value_term / steps, sum.policy_term / steps, sum.regularization / steps};
    rep.buffer_size = buffer.size();
    rep.learning_rate = lr;

    save_checkpoint(latest_checkpoint_path(opts.checkpoint_dir), board, result.net, &result.optimizer, extra(it));
    if (it % cfg.checkpoint_every == 0 || it == cfg.total_iterations) {
      save_checkpoint(iteration_checkpoint_path(opts.checkpoint_dir, it), board, result.net, &result.optimizer,
                      extra(it));
    }
    rep.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    result.last_iteration = it;
    if (!opts.metrics_log.empty()) {
      std::ofstream log(opts.metrics_log, std::ios::app);
      log << rep.to_json().dump() << '\n';
    }
    if (opts.on_report) opts.on_report(rep);
    result.reports.push_back(rep);
  }

  result.final_checkpoint = latest_checkpoint_path(opts.checkpoint_dir);
  if (result.last_iteration == start - 1 && !opts.resume) {
    // Nothing completed; still leave a resumable checkpoint behind.
    save_checkpoint(result.final_checkpoint, board, result.net, &result.optimizer, extra(result.last_iteration));
  } else if (result.last_iteration == start - 1) {
    result.final_checkpoint = *opts.resume;
  }
  return result;
}

}  // namespace gomoku
