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

// Engine configuration file (JSON). Every section is optional and falls back
// to defaults; unknown keys and mistyped values are rejected with the JSON
// pointer of the offending entry. Relative paths resolve against the
// directory holding the config file.
//
//   {
//     "board":   "6x6/4" | {"height": 6, "width": 6, "n_in_row": 4},
//     "search":  {"n_simulations", "c_puct", "dirichlet_alpha",
//                 "dirichlet_epsilon", "temperature", "rollout_limit",
//                 "rng_seed"},
//     "train":   {"games_per_iteration", "sims_per_move", "temperature_moves",
//                 "batch_size", "steps_per_iteration", "buffer_capacity",
//                 "checkpoint_every", "total_iterations", "rng_seed",
//                 "learning_rate", "l2", "dirichlet_epsilon"},
//     "network": {"trunk_channels", "policy_channels", "value_channels",
//                 "value_hidden"},
//     "paths":   {"checkpoint_dir", "records_dir", "metrics_log"},
//     "serve":   {"address", "port", "static_dir", "session_idle_seconds",
//                 "max_simulations"},
//     "workers": 1
//   }

#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "gomoku/network.hpp"
#include "gomoku/search.hpp"
#include "gomoku/training.hpp"

namespace gomoku {

struct PathsConfig {
  std::filesystem::path checkpoint_dir = "checkpoints";
  std::filesystem::path records_dir = "records";
  std::filesystem::path metrics_log = "metrics.jsonl";
};

struct ServeConfig {
  std::string address = "127.0.0.1";
  int port = 8080;
  std::filesystem::path static_dir;  // empty: no static assets
  int session_idle_seconds = 3600;
  int max_simulations = 20000;  // cap on per-session agent budgets
};

struct EngineConfig {
  BoardConfig board = kBoard6x6;
  SearchConfig search;
  TrainConfig train;
  NetworkArch network = NetworkArch::for_board(kBoard6x6);
  PathsConfig paths;
  ServeConfig serve;
  int workers = 1;

  // Keeps derived fields in step: network dims follow the board, self-play
  // shares c_puct and alpha with the search section.
  void sync() {
    network.height = board.height;
    network.width = board.width;
    train.c_puct = search.c_puct;
    train.dirichlet_alpha = search.dirichlet_alpha;
    train.workers = workers;
  }

  void validate() const {
    board.validate();
    search.validate();
    train.validate(board);
    network.validate();
    if (network.height != board.height || network.width != board.width) {
      throw ConfigError("network dimensions do not match the board");
    }
    if (serve.port < 0 || serve.port > 65535) throw ConfigError("/serve/port: must be in [0, 65535]");
    if (serve.address.empty()) throw ConfigError("/serve/address: must not be empty");
    if (serve.session_idle_seconds < 1) throw ConfigError("/serve/session_idle_seconds: must be positive");
    if (serve.max_simulations < 1) throw ConfigError("/serve/max_simulations: must be positive");
    if (workers < 1) throw ConfigError("/workers: must be positive");
  }
};

namespace detail {

// Reads typed fields out of one JSON object, remembering which keys were
// consumed so leftovers can be reported.
class Section {
 public:
  Section(const nlohmann::json& j, std::string pointer) : j_(j), ptr_(std::move(pointer)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  void allow(std::initializer_list<std::string_view> keys) {
    for (const auto& [key, value] : j_.items()) {
      bool ok = false;
      for (auto k : keys) ok = ok || key == k;
      if (!ok) throw ConfigError(ptr_ + "/" + key + ": unknown key");
    }
  }

  template <class T>
  void read(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    const std::string at = ptr_ + "/" + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(at + ": expected a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(at + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
          out = v.get<T>();
        } else {
          throw ConfigError(at + ": expected a non-negative integer");
        }
      } else {
        out = v.get<T>();
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(at + ": expected a number");
      out = v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(at + ": expected a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
      if (!v.is_string()) throw ConfigError(at + ": expected a string");
      out = v.get<std::string>();
    } else {
      static_assert(std::is_same_v<T, std::vector<int>>);
      if (!v.is_array()) throw ConfigError(at + ": expected an array of integers");
      out.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer()) throw ConfigError(at + "/" + std::to_string(i) + ": expected an integer");
        out.push_back(v[i].get<int>());
      }
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const nlohmann::json& at(const char* key) const { return j_.at(key); }
  std::string child(const char* key) const { return ptr_ + "/" + key; }

 private:
  std::string where() const { return ptr_.empty() ? "/" : ptr_; }

  const nlohmann::json& j_;
  std::string ptr_;
};

// "HxW/N"
inline BoardConfig parse_board_preset(const std::string& text, const std::string& at) {
  int h = 0;
  int w = 0;
  int n = 0;
  char x = 0;
  char slash = 0;
  std::istringstream in(text);
  if (!(in >> h >> x >> w >> slash >> n) || (x != 'x' && x != 'X') || slash != '/' || !in.eof()) {
    throw ConfigError(at + ": board must look like \"6x6/4\"");
  }
  return {h, w, n};
}

}  // namespace detail

inline BoardConfig parse_board(const nlohmann::json& j, const std::string& at = "/board") {
  if (j.is_string()) return detail::parse_board_preset(j.get<std::string>(), at);
  detail::Section s(j, at);
  s.allow({"height", "width", "n_in_row"});
  BoardConfig b = kBoard6x6;
  s.read("height", b.height);
  s.read("width", b.width);
  s.read("n_in_row", b.n_in_row);
  return b;
}

inline EngineConfig parse_engine_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  EngineConfig cfg;
  detail::Section root(j, "");
  root.allow({"board", "search", "train", "network", "paths", "serve", "workers"});
  if (root.has("board")) cfg.board = parse_board(root.at("board"));
  cfg.network = NetworkArch::for_board(cfg.board);
  root.read("workers", cfg.workers);

  if (root.has("search")) {
    detail::Section s(root.at("search"), "/search");
    s.allow({"n_simulations", "c_puct", "dirichlet_alpha", "dirichlet_epsilon", "temperature", "rollout_limit",
             "rng_seed"});
    s.read("n_simulations", cfg.search.n_simulations);
    s.read("c_puct", cfg.search.c_puct);
    s.read("dirichlet_alpha", cfg.search.dirichlet_alpha);
    s.read("dirichlet_epsilon", cfg.search.dirichlet_epsilon);
    s.read("temperature", cfg.search.temperature);
    s.read("rollout_limit", cfg.search.rollout_limit);
    s.read("rng_seed", cfg.search.rng_seed);
  }
  if (root.has("train")) {
    detail::Section s(root.at("train"), "/train");
    s.allow({"games_per_iteration", "sims_per_move", "temperature_moves", "batch_size", "steps_per_iteration",
             "buffer_capacity", "checkpoint_every", "total_iterations", "rng_seed", "learning_rate", "l2",
             "dirichlet_epsilon"});
    auto& t = cfg.train;
    s.read("games_per_iteration", t.games_per_iteration);
    s.read("sims_per_move", t.sims_per_move);
    s.read("temperature_moves", t.temperature_moves);
    s.read("batch_size", t.batch_size);
    s.read("steps_per_iteration", t.steps_per_iteration);
    s.read("buffer_capacity", t.buffer_capacity);
    s.read("checkpoint_every", t.checkpoint_every);
    s.read("total_iterations", t.total_iterations);
    s.read("rng_seed", t.rng_seed);
    s.read("learning_rate", t.learning_rate);
    s.read("l2", t.l2);
    s.read("dirichlet_epsilon", t.dirichlet_epsilon);
  }
  if (root.has("network")) {
    detail::Section s(root.at("network"), "/network");
    s.allow({"trunk_channels", "policy_channels", "value_channels", "value_hidden"});
    s.read("trunk_channels", cfg.network.trunk_channels);
    s.read("policy_channels", cfg.network.policy_channels);
    s.read("value_channels", cfg.network.value_channels);
    s.read("value_hidden", cfg.network.value_hidden);
  }
  if (root.has("paths")) {
    detail::Section s(root.at("paths"), "/paths");
    s.allow({"checkpoint_dir", "records_dir", "metrics_log"});
    s.read("checkpoint_dir", cfg.paths.checkpoint_dir);
    s.read("records_dir", cfg.paths.records_dir);
    s.read("metrics_log", cfg.paths.metrics_log);
  }
  if (root.has("serve")) {
    detail::Section s(root.at("serve"), "/serve");
    s.allow({"address", "port", "static_dir", "session_idle_seconds", "max_simulations"});
    s.read("address", cfg.serve.address);
    s.read("port", cfg.serve.port);
    s.read("static_dir", cfg.serve.static_dir);
    s.read("session_idle_seconds", cfg.serve.session_idle_seconds);
    s.read("max_simulations", cfg.serve.max_simulations);
  }

  const auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative() && !base_dir.empty()) p = base_dir / p;
  };
  resolve(cfg.paths.checkpoint_dir);
  resolve(cfg.paths.records_dir);
  resolve(cfg.paths.metrics_log);
  resolve(cfg.serve.static_dir);
  cfg.sync();
  cfg.validate();
  return cfg;
}

inline EngineConfig load_engine_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return parse_engine_config(j, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace gomoku
