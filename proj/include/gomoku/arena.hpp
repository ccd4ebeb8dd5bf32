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

// Agents and head-to-head matches. Arena play is noise-free and greedy
// (t = 0) and searches every move from a fresh tree, so results measure
// policy strength rather than exploration.

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gomoku/checkpoint.hpp"
#include "gomoku/record.hpp"
#include "gomoku/search.hpp"

namespace gomoku {

// ---------------------------------------------------------------------------
// Agent specs: "mcts:N", "neural:PATH:N", "random".

struct PureMctsSpec {
  int playouts = 1000;
  friend bool operator==(const PureMctsSpec&, const PureMctsSpec&) = default;
};
struct NeuralSpec {
  std::filesystem::path checkpoint;
  int simulations = 400;
  friend bool operator==(const NeuralSpec&, const NeuralSpec&) = default;
};
struct RandomSpec {
  friend bool operator==(const RandomSpec&, const RandomSpec&) = default;
};

using AgentSpec = std::variant<PureMctsSpec, NeuralSpec, RandomSpec>;

inline int parse_budget(const std::string& text, const std::string& spec) {
  std::size_t used = 0;
  int n = 0;
  try {
    n = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw UsageError("bad budget in agent spec '" + spec + "'");
  if (n < 1) throw UsageError("budget must be positive in agent spec '" + spec + "'");
  return n;
}

inline AgentSpec parse_agent_spec(const std::string& spec) {
  if (spec == "random") return RandomSpec{};
  if (spec.rfind("mcts:", 0) == 0) return PureMctsSpec{parse_budget(spec.substr(5), spec)};
  if (spec.rfind("neural:", 0) == 0) {
    // The path may itself contain ':' so the budget is split off the end.
    const std::string rest = spec.substr(7);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw UsageError("neural agent spec must be neural:PATH:SIMULATIONS, got '" + spec + "'");
    }
    return NeuralSpec{rest.substr(0, colon), parse_budget(rest.substr(colon + 1), spec)};
  }
  throw UsageError("unknown agent spec '" + spec + "' (expected mcts:N, neural:PATH:N or random)");
}

inline std::string format_agent_spec(const AgentSpec& spec) {
  struct V {
    std::string operator()(const PureMctsSpec& s) const { return "mcts:" + std::to_string(s.playouts); }
    std::string operator()(const NeuralSpec& s) const {
      return "neural:" + s.checkpoint.string() + ":" + std::to_string(s.simulations);
    }
    std::string operator()(const RandomSpec&) const { return "random"; }
  };
  return std::visit(V{}, spec);
}

// ---------------------------------------------------------------------------
// Agents.

struct AgentMoveReport {
  Move move;
  std::vector<float> distribution;  // normalized visits over cells
  double root_value = 0.0;
  int simulations = 0;
  double think_ms = 0.0;

  MoveDiagnostics diagnostics() const { return {distribution, root_value, simulations}; }
};

struct ArenaOptions {
  double c_puct = 5.0;
  int rollout_limit = 0;
  int workers = 1;
};

class Agent {
 public:
  virtual ~Agent() = default;
  // Picks a move for the side to move. `temperature` > 0 samples from the
  // visit distribution instead of taking the most visited move.
  virtual AgentMoveReport choose(const GameState& state, Rng& rng, double temperature = 0.0) = 0;
};

class RandomAgent final : public Agent {
 public:
  AgentMoveReport choose(const GameState& state, Rng& rng, double) override {
    const auto t0 = std::chrono::steady_clock::now();
    const auto legal = state.legal_indices();
    std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
    AgentMoveReport r;
    r.move = cell_move(state.config(), legal[pick(rng)]);
    r.distribution = uniform_priors(state);
    r.think_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }
};

template <class E>
class SearchAgent final : public Agent {
 public:
  SearchAgent(E evaluator, SearchConfig cfg) : eval_(std::move(evaluator)), cfg_(cfg) {}

  AgentMoveReport choose(const GameState& state, Rng& rng, double temperature) override {
    const auto t0 = std::chrono::steady_clock::now();
    SearchConfig cfg = cfg_;
    cfg.rng_seed = rng();
    Mcts<E> mcts(eval_, cfg);
    const SearchResult res = mcts.run(state);
    const bool visited = std::any_of(res.visits.begin(), res.visits.end(), [](int v) { return v > 0; });
    const auto probs =
        visited ? move_probabilities(mcts.tree(), state.config().cells(), temperature) : res.distribution;
    const int cell = temperature > 0.0 ? sample_cell(probs, rng) : argmax_cell(probs);
    AgentMoveReport r;
    r.move = cell_move(state.config(), cell);
    r.distribution = res.distribution;
    r.root_value = res.root_value;
    r.simulations = res.simulations;
    r.think_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }

 private:
  E eval_;
  SearchConfig cfg_;
};

// A spec with its checkpoint loaded once; instances share the read-only
// network and each owns its own evaluation buffers.
class PreparedAgent {
 public:
  // Throws CheckpointError when a neural checkpoint cannot be used on `board`.
  PreparedAgent(AgentSpec spec, const BoardConfig& board, const ArenaOptions& opts = {})
      : spec_(std::move(spec)), opts_(opts) {
    if (const auto* n = std::get_if<NeuralSpec>(&spec_)) {
      auto ck = load_checkpoint(n->checkpoint, board);
      net_ = std::make_shared<const PolicyValueNet<float>>(std::move(ck.net));
    }
  }

  const AgentSpec& spec() const noexcept { return spec_; }
  const std::shared_ptr<const PolicyValueNet<float>>& network() const noexcept { return net_; }

  std::unique_ptr<Agent> instantiate() const {
    SearchConfig cfg;
    cfg.c_puct = opts_.c_puct;
    cfg.dirichlet_epsilon = 0.0;
    cfg.temperature = 0.0;
    if (const auto* m = std::get_if<PureMctsSpec>(&spec_)) {
      cfg.n_simulations = m->playouts;
      return std::make_unique<SearchAgent<RolloutEvaluator>>(RolloutEvaluator(opts_.rollout_limit), cfg);
    }
    if (const auto* n = std::get_if<NeuralSpec>(&spec_)) {
      cfg.n_simulations = n->simulations;
      return std::make_unique<SearchAgent<NetworkEvaluator<float>>>(NetworkEvaluator<float>(*net_), cfg);
    }
    return std::make_unique<RandomAgent>();
  }

 private:
  AgentSpec spec_;
  ArenaOptions opts_;
  std::shared_ptr<const PolicyValueNet<float>> net_;
};

// ---------------------------------------------------------------------------
// Matches.

// Plays one game. `temperature_moves` plies at the start are sampled at
// t = 1 (0 for a fully greedy game).
inline GameRecord play_game(Agent& first, Agent& second, const BoardConfig& board, Rng& rng,
                            int temperature_moves = 0) {
  GameState s(board);
  GameRecord rec;
  rec.config = board;
  while (!s.terminal()) {
    Agent& mover = s.to_move() == Player::P1 ? first : second;
    const double t = s.ply() < temperature_moves ? 1.0 : 0.0;
    const AgentMoveReport r = mover.choose(s, rng, t);
    s.play(r.move);
    rec.moves.push_back(r.move);
    rec.search.push_back(r.diagnostics());
  }
  rec.outcome = s.outcome();
  return rec;
}

struct MatchResult {
  int games = 0;
  int wins_a = 0;
  int wins_b = 0;
  int draws = 0;
  int wins_a_first = 0;  // wins by a while moving first
  int wins_a_second = 0;
  int wins_b_first = 0;
  int wins_b_second = 0;
  int a_first_games = 0;
  std::vector<GameRecord> records;

  double score_a() const { return games ? (wins_a + 0.5 * draws) / games : 0.0; }
};

namespace detail {

// Runs `play(g)` for g in [0, games) on up to `workers` threads; results are
// stored by index so aggregation order never depends on scheduling.
template <class F>
std::vector<GameRecord> run_games(int games, int workers, F play) {
  std::vector<GameRecord> out(static_cast<std::size_t>(games));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int g = next++; g < games; g = next++) out[static_cast<std::size_t>(g)] = play(g);
  };
  const int n = std::min(workers, games);
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  }
  return out;
}

}  // namespace detail

inline MatchResult pit(const AgentSpec& a, const AgentSpec& b, int games, bool swap_sides, std::uint64_t seed,
                       const BoardConfig& board, const ArenaOptions& opts = {}) {
  if (games < 1) throw UsageError("pit needs at least one game");
  if (swap_sides && games % 2 != 0) throw UsageError("pit with swap_sides needs an even number of games");
  std::optional<PreparedAgent> pa;
  std::optional<PreparedAgent> pb;
  try {
    pa.emplace(a, board, opts);
    pb.emplace(b, board, opts);
  } catch (const CheckpointError& e) {
    throw ConfigError(e.what());
  }

  MatchResult m;
  m.games = games;
  m.records = detail::run_games(games, opts.workers, [&](int g) {
    const bool a_first = !swap_sides || g % 2 == 0;
    auto agent_a = pa->instantiate();
    auto agent_b = pb->instantiate();
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(g)));
    GameRecord rec = a_first ? play_game(*agent_a, *agent_b, board, rng) : play_game(*agent_b, *agent_a, board, rng);
    rec.meta = {{"source", "arena"},
                {"game", g},
                {"P1", format_agent_spec(a_first ? a : b)},
                {"P2", format_agent_spec(a_first ? b : a)},
                {"seed", seed}};
    return rec;
  });
  for (std::size_t g = 0; g < m.records.size(); ++g) {
    const bool a_first = !swap_sides || g % 2 == 0;
    m.a_first_games += a_first;
    const Outcome& o = m.records[g].outcome;
    if (!o.is_win()) {
      ++m.draws;
      continue;
    }
    const bool first_won = o.winner() == Player::P1;
    if (first_won == a_first) {
      ++m.wins_a;
      (first_won ? m.wins_a_first : m.wins_a_second) += 1;
    } else {
      ++m.wins_b;
      (first_won ? m.wins_b_first : m.wins_b_second) += 1;
    }
  }
  return m;
}

struct SweepRow {
  int budget = 0;
  MatchResult result;  // a = neural, b = PureMCTS(budget)
};

inline std::vector<SweepRow> budget_sweep(const AgentSpec& neural, const std::vector<int>& budgets,
                                          int games_per_point, std::uint64_t seed, const BoardConfig& board,
                                          const ArenaOptions& opts = {}) {
  if (budgets.empty()) throw UsageError("budget sweep needs at least one budget");
  std::vector<SweepRow> rows;
  for (const int k : budgets) {
    if (k < 1) throw UsageError("sweep budgets must be positive");
    rows.push_back({k, pit(neural, PureMctsSpec{k}, games_per_point, true,
                           derive_seed(seed, static_cast<std::uint64_t>(k)), board, opts)});
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "budget,games,wins_neural,wins_mcts,draws,winrate\n";
  for (const auto& r : rows) {
    char rate[32];
    std::snprintf(rate, sizeof rate, "%.4f", r.result.score_a());
    out << r.budget << ',' << r.result.games << ',' << r.result.wins_a << ',' << r.result.wins_b << ','
        << r.result.draws << ',' << rate << '\n';
  }
}

struct SelfPlayWinrate {
  int games = 0;
  int p1_wins = 0;
  int p2_wins = 0;
  int draws = 0;
  std::vector<GameRecord> records;

  // Draws count as non-wins.
  double first_player_fraction() const { return games ? static_cast<double>(p1_wins) / games : 0.0; }
};

// The agent plays itself greedily except for the first `temperature_moves`
// plies, which are sampled using a per-game seed so openings differ.
inline SelfPlayWinrate selfplay_winrate(const AgentSpec& agent, int games, std::uint64_t seed,
                                        const BoardConfig& board, int temperature_moves = 8,
                                        const ArenaOptions& opts = {}) {
  if (games < 1) throw UsageError("selfplay_winrate needs at least one game");
  std::optional<PreparedAgent> prepared;
  try {
    prepared.emplace(agent, board, opts);
  } catch (const CheckpointError& e) {
    throw ConfigError(e.what());
  }
  SelfPlayWinrate out;
  out.games = games;
  out.records = detail::run_games(games, opts.workers, [&](int g) {
    auto p1 = prepared->instantiate();
    auto p2 = prepared->instantiate();
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(g)));
    GameRecord rec = play_game(*p1, *p2, board, rng, temperature_moves);
    rec.meta = {{"source", "selfplay_eval"}, {"game", g}, {"agent", format_agent_spec(agent)}, {"seed", seed}};
    return rec;
  });
  for (const auto& r : out.records) {
    if (!r.outcome.is_win()) {
      ++out.draws;
    } else {
      (r.outcome.winner() == Player::P1 ? out.p1_wins : out.p2_wins) += 1;
    }
  }
  return out;
}

}  // namespace gomoku
