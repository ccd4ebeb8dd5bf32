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

// Human-vs-agent game sessions, independent of the transport. The HTTP and
// WebSocket layer in server.hpp is a thin mapping onto SessionManager.
//
// Payloads (JSON):
//   create request   {"agent": "mcts:200", "human_side": "P1"|"P2",
//                     "board": "6x6/4" | {...}, "seed": 7}
//   move request     {"row": r, "col": c, "ply": p}   ("ply" optional; when
//                     present it must equal the session's current ply)
//   snapshot         {"id", "config", "board": ["..x...", ...], "to_move",
//                     "ply", "status": "active"|"finished", "outcome",
//                     "human_side", "agent", "moves": [{"ply", "mover",
//                     "move": [r, c], "report"?}], "created_at"}
//   agent report     {"move": [r, c], "distribution": [...], "value",
//                     "simulations", "think_ms"}
//   events           {"type": "move_applied", "ply", "mover", "move"}
//                    {"type": "agent_report", "ply", "report"}
//                    {"type": "game_over", "ply", "outcome"}
//                    "ply" is the ply count after the move it belongs to.
//   errors           {"code", "message", "ply"?}

#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gomoku/arena.hpp"
#include "gomoku/config.hpp"
#include "gomoku/record.hpp"

namespace gomoku {

enum class ServiceErrorCode {
  BadRequest,
  InvalidAgent,
  CheckpointNotFound,
  SessionNotFound,
  IllegalMove,
  OutOfTurn,
  SessionFinished,
};

inline const char* error_code_name(ServiceErrorCode c) {
  switch (c) {
    case ServiceErrorCode::BadRequest: return "bad_request";
    case ServiceErrorCode::InvalidAgent: return "invalid_agent";
    case ServiceErrorCode::CheckpointNotFound: return "checkpoint_not_found";
    case ServiceErrorCode::SessionNotFound: return "session_not_found";
    case ServiceErrorCode::IllegalMove: return "illegal_move";
    case ServiceErrorCode::OutOfTurn: return "out_of_turn";
    case ServiceErrorCode::SessionFinished: return "session_finished";
  }
  return "internal";
}

inline int error_http_status(ServiceErrorCode c) {
  switch (c) {
    case ServiceErrorCode::BadRequest:
    case ServiceErrorCode::InvalidAgent:
    case ServiceErrorCode::IllegalMove: return 400;
    case ServiceErrorCode::CheckpointNotFound:
    case ServiceErrorCode::SessionNotFound: return 404;
    case ServiceErrorCode::OutOfTurn:
    case ServiceErrorCode::SessionFinished: return 409;
  }
  return 500;
}

class ServiceError : public Error {
 public:
  ServiceError(ServiceErrorCode code, const std::string& message, std::optional<int> ply = std::nullopt)
      : Error(message), code_(code), ply_(ply) {}

  ServiceErrorCode code() const noexcept { return code_; }
  std::optional<int> ply() const noexcept { return ply_; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"code", error_code_name(code_)}, {"message", what()}};
    if (ply_) j["ply"] = *ply_;
    return j;
  }

 private:
  ServiceErrorCode code_;
  std::optional<int> ply_;
};

inline nlohmann::json move_json(Move m) { return nlohmann::json::array({m.row, m.col}); }

inline nlohmann::json report_json(const AgentMoveReport& r) {
  return {{"move", move_json(r.move)},
          {"distribution", r.distribution},
          {"value", r.root_value},
          {"simulations", r.simulations},
          {"think_ms", r.think_ms}};
}

inline nlohmann::json board_json(const GameState& s) { return board_rows(s); }

inline nlohmann::json board_config_json(const BoardConfig& b) {
  return {{"height", b.height}, {"width", b.width}, {"n_in_row", b.n_in_row}};
}

struct ServiceOptions {
  BoardConfig default_board = kBoard6x6;
  ArenaOptions arena;
  int max_simulations = 20000;
  std::chrono::seconds idle_timeout{3600};
  std::filesystem::path records_dir;  // empty: finished games are not written
};

class SessionManager {
 public:
  explicit SessionManager(ServiceOptions opts = {}) : opts_(std::move(opts)) {}

  nlohmann::json create(const nlohmann::json& request);
  nlohmann::json submit(const std::string& id, const nlohmann::json& request);
  nlohmann::json snapshot(const std::string& id) const;

  // Events at indices >= `cursor`; waits up to `timeout` when none are
  // pending. Sets `finished` once the session has ended and every event has
  // been returned. Throws session_not_found for unknown (or expired) ids.
  std::vector<nlohmann::json> events(const std::string& id, std::size_t cursor, std::chrono::milliseconds timeout,
                                     bool* finished = nullptr) const;
  // Index of the first event whose ply is greater than `last_seen_ply`.
  std::size_t cursor_after_ply(const std::string& id, int last_seen_ply) const;

  // Drops sessions idle for longer than the configured timeout. Returns how
  // many were removed.
  std::size_t expire(std::chrono::steady_clock::time_point now = std::chrono::steady_clock::now());
  std::size_t size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

 private:
  struct Session {
    std::string id;
    BoardConfig board;
    AgentSpec spec;
    Player human = Player::P1;
    GameState state{kBoard6x6};
    std::vector<Move> moves;
    std::vector<std::optional<AgentMoveReport>> reports;
    std::vector<nlohmann::json> events;
    std::unique_ptr<Agent> agent;
    Rng rng;
    std::string created_at;
    std::chrono::steady_clock::time_point last_active;

    // `turn` serializes moves; `mu` guards the fields readers look at.
    std::mutex turn;
    mutable std::mutex mu;
    mutable std::condition_variable changed;

    bool finished() const { return state.terminal(); }
  };

  std::shared_ptr<Session> find(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(ServiceErrorCode::SessionNotFound, "no session " + id);
    return it->second;
  }

  std::shared_ptr<const PreparedAgent> prepare(const AgentSpec& spec, const BoardConfig& board);
  // Plays a move and records its events. Caller holds `turn`.
  void apply(Session& s, Move m, const std::optional<AgentMoveReport>& report);
  void agent_move(Session& s, nlohmann::json* out);
  void finish(Session& s);
  nlohmann::json snapshot_locked(const Session& s) const;
  std::string new_id();

  ServiceOptions opts_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<const PreparedAgent>> agents_;
  std::mt19937_64 id_rng_{std::random_device{}()};
  std::uint64_t counter_ = 0;
  std::mutex records_mu_;
};

inline std::string SessionManager::new_id() {
  // Caller holds mu_.
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  const std::uint64_t v = id_rng_() ^ (++counter_ << 48);
  for (int k = 0; k < 16; ++k) id.push_back(kHex[(v >> (4 * k)) & 0xf]);
  return id;
}

inline std::shared_ptr<const PreparedAgent> SessionManager::prepare(const AgentSpec& spec, const BoardConfig& board) {
  const std::string key = format_agent_spec(spec) + "@" + board.to_string();
  {
    std::lock_guard lock(mu_);
    if (const auto it = agents_.find(key); it != agents_.end()) return it->second;
  }
  std::shared_ptr<const PreparedAgent> p;
  try {
    p = std::make_shared<const PreparedAgent>(spec, board, opts_.arena);
  } catch (const CheckpointError& e) {
    if (e.kind() == CheckpointError::Kind::NotFound) {
      throw ServiceError(ServiceErrorCode::CheckpointNotFound, e.what());
    }
    throw ServiceError(ServiceErrorCode::InvalidAgent, e.what());
  }
  std::lock_guard lock(mu_);
  agents_.emplace(key, p);
  return p;
}

inline nlohmann::json SessionManager::create(const nlohmann::json& request) {
  if (!request.is_object()) throw ServiceError(ServiceErrorCode::BadRequest, "request body must be a JSON object");
  for (const auto& [key, value] : request.items()) {
    if (key != "agent" && key != "human_side" && key != "board" && key != "seed") {
      throw ServiceError(ServiceErrorCode::BadRequest, "unknown field '" + key + "'");
    }
  }
  BoardConfig board = opts_.default_board;
  if (request.contains("board")) {
    try {
      board = parse_board(request["board"], "/board");
      board.validate();
    } catch (const ConfigError& e) {
      throw ServiceError(ServiceErrorCode::BadRequest, e.what());
    }
  }
  if (!request.contains("agent") || !request["agent"].is_string()) {
    throw ServiceError(ServiceErrorCode::InvalidAgent, "field 'agent' must be an agent spec string");
  }
  AgentSpec spec;
  try {
    spec = parse_agent_spec(request["agent"].get<std::string>());
  } catch (const UsageError& e) {
    throw ServiceError(ServiceErrorCode::InvalidAgent, e.what());
  }
  const int budget = std::visit(
      [](const auto& s) -> int {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, PureMctsSpec>) return s.playouts;
        if constexpr (std::is_same_v<S, NeuralSpec>) return s.simulations;
        return 0;
      },
      spec);
  if (budget > opts_.max_simulations) {
    throw ServiceError(ServiceErrorCode::InvalidAgent,
                       "agent budget exceeds the server limit of " + std::to_string(opts_.max_simulations));
  }
  Player human = Player::P1;
  if (request.contains("human_side")) {
    const auto& h = request["human_side"];
    if (h == "P1") {
      human = Player::P1;
    } else if (h == "P2") {
      human = Player::P2;
    } else {
      throw ServiceError(ServiceErrorCode::BadRequest, "human_side must be \"P1\" or \"P2\"");
    }
  }
  std::uint64_t seed = 0;
  if (request.contains("seed")) {
    const auto& v = request["seed"];
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ServiceError(ServiceErrorCode::BadRequest, "seed must be a non-negative integer");
    }
    seed = request["seed"].get<std::uint64_t>();
  }

  const auto prepared = prepare(spec, board);
  auto session = std::make_shared<Session>();
  session->board = board;
  session->spec = spec;
  session->human = human;
  session->state = GameState(board);
  session->agent = prepared->instantiate();
  session->last_active = std::chrono::steady_clock::now();
  {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    session->created_at = buf;
  }
  {
    std::lock_guard lock(mu_);
    session->id = new_id();
    session->rng.seed(request.contains("seed") ? seed : id_rng_());
  }

  std::lock_guard turn(session->turn);
  nlohmann::json reply;
  if (human == Player::P2) agent_move(*session, &reply);
  {
    std::lock_guard lock(mu_);
    sessions_.emplace(session->id, session);
  }
  std::lock_guard lock(session->mu);
  return snapshot_locked(*session);
}

inline void SessionManager::apply(Session& s, Move m, const std::optional<AgentMoveReport>& report) {
  std::lock_guard lock(s.mu);
  const Player mover = s.state.to_move();
  s.state.play(m);
  s.moves.push_back(m);
  s.reports.push_back(report);
  const int ply = s.state.ply();
  s.events.push_back({{"type", "move_applied"}, {"ply", ply}, {"mover", player_name(mover)}, {"move", move_json(m)}});
  if (report) s.events.push_back({{"type", "agent_report"}, {"ply", ply}, {"report", report_json(*report)}});
  if (s.state.terminal()) {
    s.events.push_back({{"type", "game_over"}, {"ply", ply}, {"outcome", outcome_token(s.state.outcome())}});
  }
  s.last_active = std::chrono::steady_clock::now();
  s.changed.notify_all();
}

inline void SessionManager::agent_move(Session& s, nlohmann::json* out) {
  const AgentMoveReport r = s.agent->choose(s.state, s.rng, 0.0);
  apply(s, r.move, r);
  if (out) {
    (*out)["agent_move"] = move_json(r.move);
    (*out)["agent_report"] = report_json(r);
  }
  if (s.finished()) finish(s);
}

inline void SessionManager::finish(Session& s) {
  if (opts_.records_dir.empty()) return;
  GameRecord rec;
  rec.config = s.board;
  rec.moves = s.moves;
  rec.outcome = s.state.outcome();
  for (const auto& r : s.reports) {
    rec.search.push_back(r ? std::optional<MoveDiagnostics>(r->diagnostics()) : std::nullopt);
  }
  rec.meta = {{"source", "service"},
              {"session", s.id},
              {"agent", format_agent_spec(s.spec)},
              {"human_side", player_name(s.human)},
              {"created_at", s.created_at}};
  std::lock_guard lock(records_mu_);
  std::filesystem::create_directories(opts_.records_dir);
  std::ofstream f(opts_.records_dir / "service.jsonl", std::ios::app);
  write_record(f, rec);
}

inline nlohmann::json SessionManager::submit(const std::string& id, const nlohmann::json& request) {
  const auto session = find(id);
  Session& s = *session;
  // A submit racing another submit on the same session loses.
  std::unique_lock turn(s.turn, std::try_to_lock);
  if (!turn.owns_lock()) {
    throw ServiceError(ServiceErrorCode::OutOfTurn, "another move for this session is being processed");
  }
  int ply = 0;
  {
    std::lock_guard lock(s.mu);
    ply = s.state.ply();
    if (s.finished()) throw ServiceError(ServiceErrorCode::SessionFinished, "session is finished", ply);
  }
  if (!request.is_object() || !request.contains("row") || !request.contains("col") ||
      !request["row"].is_number_integer() || !request["col"].is_number_integer()) {
    throw ServiceError(ServiceErrorCode::BadRequest, "move must be {\"row\": int, \"col\": int}", ply);
  }
  if (request.contains("ply")) {
    if (!request["ply"].is_number_integer()) throw ServiceError(ServiceErrorCode::BadRequest, "ply must be an integer", ply);
    if (request["ply"].get<int>() != ply) {
      throw ServiceError(ServiceErrorCode::OutOfTurn,
                         "move is for ply " + std::to_string(request["ply"].get<int>()) + ", session is at ply " +
                             std::to_string(ply),
                         ply);
    }
  }
  if (s.state.to_move() != s.human) throw ServiceError(ServiceErrorCode::OutOfTurn, "it is the agent's turn", ply);
  const Move m{request["row"].get<int>(), request["col"].get<int>()};
  if (!in_bounds(s.board, m)) {
    throw ServiceError(ServiceErrorCode::IllegalMove, "move " + m.to_string() + " is off the board", ply);
  }
  if (!s.state.is_legal(m)) {
    throw ServiceError(ServiceErrorCode::IllegalMove, "cell " + m.to_string() + " is occupied", ply);
  }

  nlohmann::json reply{{"human_move", move_json(m)}};
  apply(s, m, std::nullopt);
  if (s.finished()) {
    finish(s);
  } else {
    agent_move(s, &reply);
  }
  std::lock_guard lock(s.mu);
  reply["session"] = snapshot_locked(s);
  return reply;
}

inline nlohmann::json SessionManager::snapshot_locked(const Session& s) const {
  nlohmann::json moves = nlohmann::json::array();
  GameState replayed(s.board);
  for (std::size_t i = 0; i < s.moves.size(); ++i) {
    nlohmann::json entry{{"ply", i + 1}, {"mover", player_name(replayed.to_move())}, {"move", move_json(s.moves[i])}};
    if (s.reports[i]) entry["report"] = report_json(*s.reports[i]);
    moves.push_back(std::move(entry));
    replayed = replayed.apply_move(s.moves[i]);
  }
  const Outcome o = s.state.outcome();
  return {{"id", s.id},
          {"config", board_config_json(s.board)},
          {"board", board_json(s.state)},
          {"to_move", o.terminal() ? nlohmann::json(nullptr) : nlohmann::json(player_name(s.state.to_move()))},
          {"ply", s.state.ply()},
          {"status", o.terminal() ? "finished" : "active"},
          {"outcome", outcome_token(o)},
          {"human_side", player_name(s.human)},
          {"agent", format_agent_spec(s.spec)},
          {"moves", std::move(moves)},
          {"created_at", s.created_at}};
}

inline nlohmann::json SessionManager::snapshot(const std::string& id) const {
  const auto session = find(id);
  std::lock_guard lock(session->mu);
  return snapshot_locked(*session);
}

inline std::size_t SessionManager::cursor_after_ply(const std::string& id, int last_seen_ply) const {
  const auto session = find(id);
  std::lock_guard lock(session->mu);
  std::size_t k = 0;
  while (k < session->events.size() && session->events[k]["ply"].get<int>() <= last_seen_ply) ++k;
  return k;
}

inline std::vector<nlohmann::json> SessionManager::events(const std::string& id, std::size_t cursor,
                                                          std::chrono::milliseconds timeout, bool* finished) const {
  const auto session = find(id);
  std::unique_lock lock(session->mu);
  session->changed.wait_for(lock, timeout, [&] { return session->events.size() > cursor; });
  std::vector<nlohmann::json> out;
  for (std::size_t k = cursor; k < session->events.size(); ++k) out.push_back(session->events[k]);
  if (finished) *finished = session->finished();
  return out;
}

inline std::size_t SessionManager::expire(std::chrono::steady_clock::time_point now) {
  std::lock_guard lock(mu_);
  std::size_t removed = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::chrono::steady_clock::time_point last;
    {
      std::lock_guard slock(it->second->mu);
      last = it->second->last_active;
    }
    if (now - last > opts_.idle_timeout) {
      it = sessions_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

}  // namespace gomoku
