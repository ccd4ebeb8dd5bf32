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

// Command-line front end. Exit codes: 0 success, 2 usage or configuration
// error, 3 training divergence.

#pragma once

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gomoku/arena.hpp"
#include "gomoku/config.hpp"
#include "gomoku/server.hpp"
#include "gomoku/training.hpp"

namespace gomoku {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;

// ---------------------------------------------------------------------------
// Text rendering.

inline void render_board(std::ostream& out, const GameState& s, std::span<const float> heat = {}) {
  static constexpr std::string_view kRamp = " .:-=+*#%@";
  const auto& cfg = s.config();
  float top = 0.0f;
  for (float p : heat) top = std::max(top, p);
  out << "   ";
  for (int c = 0; c < cfg.width; ++c) out << std::setw(2) << c;
  out << '\n';
  for (int r = 0; r < cfg.height; ++r) {
    out << std::setw(2) << r << ' ';
    for (int c = 0; c < cfg.width; ++c) {
      const int i = r * cfg.width + c;
      char ch = '.';
      if (s.at(i) == Cell::P1) {
        ch = 'x';
      } else if (s.at(i) == Cell::P2) {
        ch = 'o';
      } else if (!heat.empty() && top > 0.0f) {
        const float p = heat[static_cast<std::size_t>(i)];
        const auto level = static_cast<std::size_t>(std::lround(p / top * (kRamp.size() - 1)));
        ch = p > 0.0f ? kRamp[std::max<std::size_t>(level, 1)] : ' ';
      }
      out << ' ' << ch;
    }
    out << '\n';
  }
}

inline std::optional<Move> parse_move_text(const std::string& text) {
  std::istringstream in(text);
  int r = 0;
  int c = 0;
  char comma = 0;
  if (!(in >> r >> comma >> c) || comma != ',') return std::nullopt;
  in >> std::ws;
  if (!in.eof()) return std::nullopt;
  return Move{r, c};
}

namespace detail {

inline std::vector<int> parse_budget_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) out.push_back(parse_budget(item, text));
  if (out.empty()) throw UsageError("empty budget list");
  return out;
}

inline EngineConfig config_for(const std::string& path) {
  if (!path.empty()) return load_engine_config(path);
  if (const char* env = std::getenv("GOMOKU_CONFIG"); env != nullptr && *env != '\0') {
    return load_engine_config(env);
  }
  EngineConfig cfg;
  cfg.sync();
  cfg.validate();
  return cfg;
}

inline void print_match(std::ostream& out, const std::string& a, const std::string& b, const MatchResult& m) {
  out << a << " vs " << b << ": games " << m.games << "  wins_a " << m.wins_a << " (first " << m.wins_a_first
      << ", second " << m.wins_a_second << ")  wins_b " << m.wins_b << " (first " << m.wins_b_first << ", second "
      << m.wins_b_second << ")  draws " << m.draws << "  score_a " << std::fixed << std::setprecision(3)
      << m.score_a() << '\n';
  out.unsetf(std::ios::floatfield);
}

inline void append_records(const std::string& path, const std::vector<GameRecord>& recs) {
  if (path.empty()) return;
  std::ofstream f(path, std::ios::app);
  if (!f) throw ConfigError("cannot write records to " + path);
  for (const auto& r : recs) write_record(f, r);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands.

struct CliContext {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  const std::atomic<bool>* stop = nullptr;
};

inline int cmd_train(const CliContext& ctx, const std::string& config_path, const std::string& resume,
                     std::optional<std::uint64_t> seed, std::optional<int> iterations) {
  EngineConfig cfg = detail::config_for(config_path);
  if (seed) cfg.train.rng_seed = *seed;
  if (iterations) cfg.train.total_iterations = *iterations;
  cfg.validate();

  TrainingOptions opts;
  opts.board = cfg.board;
  opts.arch = cfg.network;
  opts.train = cfg.train;
  opts.checkpoint_dir = cfg.paths.checkpoint_dir;
  opts.records_dir = cfg.paths.records_dir;
  opts.metrics_log = cfg.paths.metrics_log;
  if (!resume.empty()) opts.resume = resume;
  opts.stop = ctx.stop;
  opts.on_report = [&](const IterationReport& r) { ctx.out << r.summary() << std::endl; };
  const TrainingResult res = run_training(opts);
  if (res.interrupted) ctx.out << "interrupted after iteration " << res.last_iteration << '\n';
  ctx.out << "final checkpoint: " << res.final_checkpoint.string() << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string a = "mcts:1000";
  std::string b = "random";
  int games = 40;
  bool no_swap = false;
  std::string sweep;
  std::string csv;
  std::string records;
  bool selfplay = false;
  int temperature_moves = 8;
  std::uint64_t seed = 0;
  std::optional<int> workers;
};

inline int cmd_eval(const CliContext& ctx, const std::string& config_path, const EvalArgs& args) {
  const EngineConfig cfg = detail::config_for(config_path);
  ArenaOptions opts;
  opts.c_puct = cfg.search.c_puct;
  opts.rollout_limit = cfg.search.rollout_limit;
  opts.workers = args.workers.value_or(cfg.workers);
  if (opts.workers < 1) throw UsageError("--workers must be positive");
  const AgentSpec a = parse_agent_spec(args.a);

  if (args.selfplay) {
    const auto r = selfplay_winrate(a, args.games, args.seed, cfg.board, args.temperature_moves, opts);
    ctx.out << args.a << " self-play: games " << r.games << "  p1_wins " << r.p1_wins << "  p2_wins " << r.p2_wins
            << "  draws " << r.draws << "  first_player_fraction " << r.first_player_fraction() << '\n';
    detail::append_records(args.records, r.records);
    return kExitOk;
  }
  if (!args.sweep.empty()) {
    const auto budgets = detail::parse_budget_list(args.sweep);
    const auto rows = budget_sweep(a, budgets, args.games, args.seed, cfg.board, opts);
    write_sweep_csv(ctx.out, rows);
    if (!args.csv.empty()) {
      std::ofstream f(args.csv);
      if (!f) throw ConfigError("cannot write " + args.csv);
      write_sweep_csv(f, rows);
    }
    for (const auto& r : rows) detail::append_records(args.records, r.result.records);
    return kExitOk;
  }
  const AgentSpec b = parse_agent_spec(args.b);
  const bool swap = !args.no_swap;
  const MatchResult m = pit(a, b, args.games, swap, args.seed, cfg.board, opts);
  detail::print_match(ctx.out, args.a, args.b, m);
  if (!args.csv.empty()) {
    std::ofstream f(args.csv);
    if (!f) throw ConfigError("cannot write " + args.csv);
    f << "a,b,games,wins_a,wins_b,draws,score_a\n"
      << args.a << ',' << args.b << ',' << m.games << ',' << m.wins_a << ',' << m.wins_b << ',' << m.draws << ','
      << m.score_a() << '\n';
  }
  detail::append_records(args.records, m.records);
  return kExitOk;
}

inline int cmd_play(const CliContext& ctx, const std::string& config_path, const std::string& agent_text,
                    bool human_first, std::optional<std::uint64_t> seed) {
  const EngineConfig cfg = detail::config_for(config_path);
  const AgentSpec spec = parse_agent_spec(agent_text);
  ArenaOptions opts;
  opts.c_puct = cfg.search.c_puct;
  opts.rollout_limit = cfg.search.rollout_limit;
  std::optional<PreparedAgent> prepared;
  try {
    prepared.emplace(spec, cfg.board, opts);
  } catch (const CheckpointError& e) {
    throw ConfigError(e.what());
  }
  auto agent = prepared->instantiate();
  Rng rng(seed.value_or(cfg.search.rng_seed));
  const Player human = human_first ? Player::P1 : Player::P2;
  GameState s(cfg.board);
  ctx.out << "You are " << player_symbol(human) << " (" << player_name(human) << "). Enter moves as row,col.\n";
  std::vector<float> heat;
  while (!s.terminal()) {
    render_board(ctx.out, s, heat);
    if (s.to_move() == human) {
      ctx.out << "move> " << std::flush;
      std::string line;
      if (!std::getline(ctx.in, line)) {
        ctx.out << "\nbye\n";
        return kExitOk;
      }
      const auto m = parse_move_text(line);
      if (!m) {
        ctx.out << "expected row,col\n";
        continue;
      }
      if (!s.is_legal(*m)) {
        ctx.out << "illegal move " << m->to_string() << ", try again\n";
        continue;
      }
      s = s.apply_move(*m);
      heat.clear();
    } else {
      const AgentMoveReport r = agent->choose(s, rng, 0.0);
      ctx.out << "agent plays " << r.move.to_string() << " (value " << std::setprecision(3) << r.root_value
              << ", " << r.simulations << " sims)\n";
      heat = r.distribution;
      s = s.apply_move(r.move);
    }
  }
  render_board(ctx.out, s);
  if (s.outcome().is_win()) {
    ctx.out << "game over: " << player_name(s.outcome().winner()) << " ("
            << player_symbol(s.outcome().winner()) << ") wins" << (s.outcome().winner() == human ? ", you win" : "")
            << '\n';
  } else {
    ctx.out << "game over: draw\n";
  }
  return kExitOk;
}

inline int cmd_replay(const CliContext& ctx, const std::string& path, bool step, std::optional<int> game_index) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read record file " + path);
  const std::vector<GameRecord> recs = read_records(in);
  if (recs.empty()) throw RecordError("no records in " + path);
  std::size_t lo = 0;
  std::size_t hi = recs.size();
  if (game_index) {
    if (*game_index < 0 || static_cast<std::size_t>(*game_index) >= recs.size()) {
      throw UsageError("--game out of range (file holds " + std::to_string(recs.size()) + " records)");
    }
    lo = static_cast<std::size_t>(*game_index);
    hi = lo + 1;
  }
  for (std::size_t g = lo; g < hi; ++g) {
    const GameRecord& rec = recs[g];
    const auto states = replay(rec);
    ctx.out << "game " << g << " on " << rec.config.to_string() << ", " << rec.moves.size() << " plies\n";
    for (std::size_t k = 0; k < rec.moves.size(); ++k) {
      const GameState& before = states[k];
      ctx.out << "ply " << k + 1 << ": " << player_name(before.to_move()) << " ("
              << player_symbol(before.to_move()) << ") plays " << rec.moves[k].to_string() << '\n';
      render_board(ctx.out, states[k + 1]);
      if (k < rec.search.size() && rec.search[k]) {
        const auto& d = *rec.search[k];
        ctx.out << "search: " << d.simulations << " sims, value " << std::setprecision(3) << d.root_value << '\n';
        render_board(ctx.out, before, d.distribution);
      }
      if (step) {
        ctx.out << "[enter] " << std::flush;
        std::string line;
        if (!std::getline(ctx.in, line)) return kExitOk;
      }
    }
    ctx.out << "outcome: " << outcome_token(rec.outcome) << '\n';
  }
  return kExitOk;
}

struct ServeArgs {
  std::optional<int> port;
  std::optional<std::string> address;
  std::optional<std::string> static_dir;
};

inline int cmd_serve(const CliContext& ctx, const std::string& config_path, const ServeArgs& args) {
  EngineConfig cfg = detail::config_for(config_path);
  if (args.port) cfg.serve.port = *args.port;
  if (args.address) cfg.serve.address = *args.address;
  if (args.static_dir) cfg.serve.static_dir = *args.static_dir;
  cfg.validate();
  ServerOptions so = server_options_from(cfg);
  so.log = &ctx.err;
  GameServer server(so);
  try {
    server.bind();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot listen on ") + cfg.serve.address + ":" + std::to_string(cfg.serve.port) +
                      ": " + e.what());
  }
  ctx.out << "serving on http://" << cfg.serve.address << ":" << server.port() << "/v1" << std::endl;
  server.run_until(ctx.stop);
  ctx.out << "shut down" << std::endl;
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err,
                   const std::atomic<bool>* stop = nullptr) {
  CLI::App app{"AlphaZero-style Gomoku engine"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "engine config file (JSON); defaults to $GOMOKU_CONFIG or built-in defaults");

  auto* train = app.add_subcommand("train", "self-play training");
  std::string resume;
  std::uint64_t train_seed = 0;
  int iterations = 0;
  train->add_option("--config", config, "engine config file");
  train->add_option("--resume", resume, "checkpoint to resume from");
  auto* train_seed_opt = train->add_option("--seed", train_seed, "override train.rng_seed");
  auto* iter_opt = train->add_option("--iterations", iterations, "override train.total_iterations");

  auto* eval = app.add_subcommand("eval", "arena matches, budget sweeps and self-play win rates");
  EvalArgs ea;
  int eval_workers = 1;
  eval->add_option("--config", config, "engine config file");
  eval->add_option("--a", ea.a, "agent A spec (mcts:N, neural:PATH:N, random)");
  eval->add_option("--b", ea.b, "agent B spec");
  eval->add_option("--games", ea.games, "games per match or per sweep point");
  eval->add_flag("--no-swap", ea.no_swap, "keep agent A as the first player in every game");
  eval->add_option("--sweep", ea.sweep, "comma-separated PureMCTS budgets to sweep against agent A");
  eval->add_option("--csv", ea.csv, "write the result table to this CSV file");
  eval->add_option("--records", ea.records, "append game records (JSON Lines) to this file");
  eval->add_flag("--selfplay", ea.selfplay, "first-player win rate of agent A against itself");
  eval->add_option("--temperature-moves", ea.temperature_moves, "sampled opening plies in --selfplay mode");
  eval->add_option("--seed", ea.seed, "match seed");
  auto* workers_opt = eval->add_option("--workers", eval_workers, "parallel games");

  auto* play = app.add_subcommand("play", "play against an agent in the terminal");
  std::string agent = "mcts:1000";
  bool human_first = true;
  std::uint64_t play_seed = 0;
  play->add_option("--config", config, "engine config file");
  play->add_option("--agent", agent, "agent spec");
  play->add_option("--human-first", human_first, "true to move first as x")->default_str("true");
  auto* play_seed_opt = play->add_option("--seed", play_seed, "agent seed");

  auto* rep = app.add_subcommand("replay", "print a recorded game ply by ply");
  std::string record_path;
  bool step = false;
  int game = 0;
  rep->add_option("file", record_path, "record file (JSON Lines)")->required();
  rep->add_flag("--step", step, "wait for enter between plies");
  auto* game_opt = rep->add_option("--game", game, "record index within the file");

  auto* serve = app.add_subcommand("serve", "run the HTTP/WebSocket game service");
  ServeArgs sa;
  int port = 0;
  std::string address;
  std::string static_dir;
  serve->add_option("--config", config, "engine config file");
  auto* port_opt = serve->add_option("--port", port, "listen port (0 picks a free port)");
  auto* addr_opt = serve->add_option("--address", address, "bind address");
  auto* static_opt = serve->add_option("--static-dir", static_dir, "directory of static web assets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  const CliContext ctx{in, out, err, stop};
  try {
    if (*train) {
      return cmd_train(ctx, config, resume, *train_seed_opt ? std::optional(train_seed) : std::nullopt,
                       *iter_opt ? std::optional(iterations) : std::nullopt);
    }
    if (*eval) {
      if (*workers_opt) ea.workers = eval_workers;
      return cmd_eval(ctx, config, ea);
    }
    if (*play) return cmd_play(ctx, config, agent, human_first, *play_seed_opt ? std::optional(play_seed) : std::nullopt);
    if (*rep) return cmd_replay(ctx, record_path, step, *game_opt ? std::optional(game) : std::nullopt);
    if (*serve) {
      if (*port_opt) sa.port = port;
      if (*addr_opt) sa.address = address;
      if (*static_opt) sa.static_dir = static_dir;
      return cmd_serve(ctx, config, sa);
    }
  } catch (const TrainingDivergence& e) {
    err << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const RecordError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "fatal: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}

}  // namespace gomoku
