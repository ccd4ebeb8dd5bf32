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

// Game records, one JSON object per line:
//
//   {"config":{"height":6,"width":6,"n_in_row":4},
//    "moves":[[2,2],[3,3],...],
//    "outcome":"P1" | "P2" | "draw" | "ongoing",
//    "search":[{"dist":[[r,c,p],...],"value":q,"sims":n} | null, ...],
//    "meta":{...}}
//
// "search" is optional; when present it has one entry per move, holding the
// distribution the mover's search produced before playing that move.
// Cells with zero probability are omitted from "dist".

#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gomoku/game.hpp"

namespace gomoku {

struct MoveDiagnostics {
  std::vector<float> distribution;  // one entry per cell, row-major
  double root_value = 0.0;
  int simulations = 0;
};

struct GameRecord {
  BoardConfig config;
  std::vector<Move> moves;
  Outcome outcome = Outcome::ongoing();
  // Empty, or one entry per move.
  std::vector<std::optional<MoveDiagnostics>> search;
  nlohmann::json meta = nlohmann::json::object();

  bool has_search() const {
    for (const auto& s : search) {
      if (s) return true;
    }
    return false;
  }
};

inline std::string outcome_token(const Outcome& o) {
  if (o.is_win()) return player_name(o.winner());
  return o.is_draw() ? "draw" : "ongoing";
}

inline Outcome parse_outcome_token(const std::string& t) {
  if (t == "P1") return Outcome::win(Player::P1);
  if (t == "P2") return Outcome::win(Player::P2);
  if (t == "draw") return Outcome::draw();
  if (t == "ongoing") return Outcome::ongoing();
  throw RecordError("unknown outcome token '" + t + "'");
}

inline nlohmann::json to_json(const GameRecord& rec) {
  using nlohmann::json;
  json j;
  j["config"] = {{"height", rec.config.height}, {"width", rec.config.width}, {"n_in_row", rec.config.n_in_row}};
  json moves = json::array();
  for (const auto& m : rec.moves) moves.push_back({m.row, m.col});
  j["moves"] = std::move(moves);
  j["outcome"] = outcome_token(rec.outcome);
  if (rec.has_search()) {
    json search = json::array();
    for (const auto& s : rec.search) {
      if (!s) {
        search.push_back(nullptr);
        continue;
      }
      json dist = json::array();
      for (int i = 0; i < static_cast<int>(s->distribution.size()); ++i) {
        const float p = s->distribution[static_cast<std::size_t>(i)];
        if (p > 0.0f) dist.push_back({i / rec.config.width, i % rec.config.width, p});
      }
      search.push_back({{"dist", std::move(dist)}, {"value", s->root_value}, {"sims", s->simulations}});
    }
    j["search"] = std::move(search);
  }
  if (!rec.meta.empty()) j["meta"] = rec.meta;
  return j;
}

inline GameRecord record_from_json(const nlohmann::json& j) {
  GameRecord rec;
  try {
    const auto& c = j.at("config");
    rec.config = {c.at("height").get<int>(), c.at("width").get<int>(), c.at("n_in_row").get<int>()};
    rec.config.validate();
    for (const auto& m : j.at("moves")) {
      if (!m.is_array() || m.size() != 2) throw RecordError("move entries must be [row, col]");
      rec.moves.push_back({m[0].get<int>(), m[1].get<int>()});
    }
    rec.outcome = parse_outcome_token(j.at("outcome").get<std::string>());
    if (j.contains("search")) {
      const auto& search = j.at("search");
      if (search.size() != rec.moves.size()) throw RecordError("search entries do not match move count");
      for (const auto& s : search) {
        if (s.is_null()) {
          rec.search.emplace_back();
          continue;
        }
        MoveDiagnostics d;
        d.distribution.assign(static_cast<std::size_t>(rec.config.cells()), 0.0f);
        for (const auto& e : s.at("dist")) {
          const Move m{e.at(0).get<int>(), e.at(1).get<int>()};
          if (!in_bounds(rec.config, m)) throw RecordError("distribution cell out of bounds");
          d.distribution[static_cast<std::size_t>(cell_index(rec.config, m))] = e.at(2).get<float>();
        }
        d.root_value = s.value("value", 0.0);
        d.simulations = s.value("sims", 0);
        rec.search.emplace_back(std::move(d));
      }
    }
    if (j.contains("meta")) rec.meta = j.at("meta");
  } catch (const nlohmann::json::exception& e) {
    throw RecordError(std::string("malformed record: ") + e.what());
  } catch (const ConfigError& e) {
    throw RecordError(std::string("bad record config: ") + e.what());
  }
  return rec;
}

inline void write_record(std::ostream& out, const GameRecord& rec) { out << to_json(rec).dump() << '\n'; }

inline std::vector<GameRecord> read_records(std::istream& in) {
  std::vector<GameRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw RecordError("line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(record_from_json(j));
  }
  return out;
}

// Replays every move through the rules and checks the recorded outcome.
// Returns the state after each ply (index 0 is the empty board).
inline std::vector<GameState> replay(const GameRecord& rec) {
  std::vector<GameState> states;
  states.reserve(rec.moves.size() + 1);
  states.emplace_back(rec.config);
  for (std::size_t i = 0; i < rec.moves.size(); ++i) {
    const int ply = static_cast<int>(i) + 1;
    if (states.back().terminal()) throw RecordError("move after the game ended at ply " + std::to_string(ply), ply);
    try {
      states.push_back(states.back().apply_move(rec.moves[i]));
    } catch (const IllegalMoveError& e) {
      throw RecordError("ply " + std::to_string(ply) + ": " + e.what(), ply);
    }
  }
  if (!(states.back().outcome() == rec.outcome)) {
    throw RecordError("recorded outcome '" + outcome_token(rec.outcome) + "' but replay gives '" +
                          outcome_token(states.back().outcome()) + "'",
                      static_cast<int>(rec.moves.size()));
  }
  return states;
}

}  // namespace gomoku
