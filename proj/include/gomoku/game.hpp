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

// Gomoku rules: n-in-a-row on an arbitrary rectangular board, stones placed
// on intersections, first mover P1, overlines count as wins, full board with
// no run is a draw. Everything here is a value type; operations are pure.

#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gomoku/errors.hpp"

namespace gomoku {

struct BoardConfig {
  int height = 6;
  int width = 6;
  int n_in_row = 4;

  int cells() const noexcept { return height * width; }
  bool square() const noexcept { return height == width; }

  void validate() const {
    if (height <= 0 || width <= 0 || n_in_row <= 0) {
      throw ConfigError("board dimensions and n_in_row must be positive");
    }
    if (n_in_row > std::max(height, width)) {
      throw ConfigError("n_in_row " + std::to_string(n_in_row) + " cannot fit on a " +
                        std::to_string(height) + "x" + std::to_string(width) + " board");
    }
    if (height > 32 || width > 32) {
      throw ConfigError("board dimensions above 32 are not supported");
    }
  }

  std::string to_string() const {
    return std::to_string(height) + "x" + std::to_string(width) + "/" + std::to_string(n_in_row);
  }

  friend bool operator==(const BoardConfig&, const BoardConfig&) = default;
};

inline constexpr BoardConfig kBoard6x6 = {6, 6, 4};
inline constexpr BoardConfig kBoard8x8 = {8, 8, 5};

enum class Player : std::uint8_t { P1 = 1, P2 = 2 };

constexpr Player opponent(Player p) noexcept { return p == Player::P1 ? Player::P2 : Player::P1; }

inline const char* player_name(Player p) { return p == Player::P1 ? "P1" : "P2"; }

// 'x' moves first, 'o' second.
constexpr char player_symbol(Player p) noexcept { return p == Player::P1 ? 'x' : 'o'; }

enum class Cell : std::uint8_t { Empty = 0, P1 = 1, P2 = 2 };

constexpr Cell stone_of(Player p) noexcept { return static_cast<Cell>(p); }

struct Move {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Move&, const Move&) = default;

  std::string to_string() const { return std::to_string(row) + "," + std::to_string(col); }
};

inline int cell_index(const BoardConfig& cfg, Move m) noexcept { return m.row * cfg.width + m.col; }
inline Move cell_move(const BoardConfig& cfg, int index) noexcept {
  return {index / cfg.width, index % cfg.width};
}
inline bool in_bounds(const BoardConfig& cfg, Move m) noexcept {
  return m.row >= 0 && m.row < cfg.height && m.col >= 0 && m.col < cfg.width;
}

class Outcome {
 public:
  enum class Kind : std::uint8_t { Ongoing, Win, Draw };

  static constexpr Outcome ongoing() noexcept { return Outcome(Kind::Ongoing, Player::P1); }
  static constexpr Outcome win(Player p) noexcept { return Outcome(Kind::Win, p); }
  static constexpr Outcome draw() noexcept { return Outcome(Kind::Draw, Player::P1); }

  constexpr Kind kind() const noexcept { return kind_; }
  constexpr bool terminal() const noexcept { return kind_ != Kind::Ongoing; }
  constexpr bool is_win() const noexcept { return kind_ == Kind::Win; }
  constexpr bool is_draw() const noexcept { return kind_ == Kind::Draw; }
  // Only meaningful when is_win().
  constexpr Player winner() const noexcept { return winner_; }

  std::string to_string() const {
    switch (kind_) {
      case Kind::Ongoing: return "ongoing";
      case Kind::Draw: return "draw";
      case Kind::Win: return std::string("win ") + player_name(winner_);
    }
    return "?";
  }

  friend constexpr bool operator==(const Outcome& a, const Outcome& b) noexcept {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::Win || a.winner_ == b.winner_);
  }

 private:
  constexpr Outcome(Kind k, Player p) noexcept : kind_(k), winner_(p) {}

  Kind kind_;
  Player winner_;
};

// +1 win, -1 loss, 0 draw (or ongoing) from `p`'s point of view.
constexpr double reward_for(const Outcome& o, Player p) noexcept {
  if (!o.is_win()) return 0.0;
  return o.winner() == p ? 1.0 : -1.0;
}

class IllegalMoveError : public Error {
 public:
  IllegalMoveError(Move m, const std::string& why)
      : Error("illegal move " + m.to_string() + ": " + why), move_(m) {}

  Move move() const noexcept { return move_; }

 private:
  Move move_;
};

namespace detail {

inline constexpr std::array<std::array<int, 2>, 4> kLineDirections = {{{0, 1}, {1, 0}, {1, 1}, {1, -1}}};

// Longest run of `stone` through (row, col) along each direction, assuming
// (row, col) itself holds `stone`.
inline int longest_run_through(std::span<const Cell> grid, const BoardConfig& cfg, int row,
                               int col, Cell stone) noexcept {
  int best = 0;
  for (const auto& d : kLineDirections) {
    int run = 1;
    for (int sign : {1, -1}) {
      int r = row + sign * d[0];
      int c = col + sign * d[1];
      while (r >= 0 && r < cfg.height && c >= 0 && c < cfg.width &&
             grid[static_cast<std::size_t>(r * cfg.width + c)] == stone) {
        ++run;
        r += sign * d[0];
        c += sign * d[1];
      }
    }
    best = std::max(best, run);
  }
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dihedral symmetries. Each symmetry is "optionally mirror left-right, then
// rotate counter-clockwise by k quarter turns".

enum class Symmetry : std::uint8_t {
  Identity = 0,
  Rot90,
  Rot180,
  Rot270,
  Mirror,
  MirrorRot90,
  MirrorRot180,
  MirrorRot270,
};

class GameState {
 public:
  explicit GameState(BoardConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    grid_.assign(static_cast<std::size_t>(cfg_.cells()), Cell::Empty);
  }

  // Builds a position from rows of '.', 'x' (P1) and 'o' (P2). Side to move
  // follows from the stone counts; last_move is unknown and left empty.
  static GameState from_rows(const std::vector<std::string>& rows, int n_in_row);

  const BoardConfig& config() const noexcept { return cfg_; }
  std::span<const Cell> grid() const noexcept { return grid_; }
  Cell at(int index) const noexcept { return grid_[static_cast<std::size_t>(index)]; }
  Cell at(Move m) const noexcept { return at(cell_index(cfg_, m)); }
  Player to_move() const noexcept { return to_move_; }
  const std::optional<Move>& last_move() const noexcept { return last_move_; }
  int ply() const noexcept { return ply_; }
  const Outcome& outcome() const noexcept { return outcome_; }
  bool terminal() const noexcept { return outcome_.terminal(); }
  int empty_count() const noexcept { return cfg_.cells() - ply_; }

  std::vector<Move> legal_moves() const {
    require_ongoing("legal_moves");
    std::vector<Move> moves;
    moves.reserve(static_cast<std::size_t>(empty_count()));
    for (int i = 0; i < cfg_.cells(); ++i) {
      if (grid_[static_cast<std::size_t>(i)] == Cell::Empty) moves.push_back(cell_move(cfg_, i));
    }
    return moves;
  }

  // Row-major indices of the empty cells.
  std::vector<int> legal_indices() const {
    require_ongoing("legal_indices");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(empty_count()));
    for (int i = 0; i < cfg_.cells(); ++i) {
      if (grid_[static_cast<std::size_t>(i)] == Cell::Empty) out.push_back(i);
    }
    return out;
  }

  bool is_legal(Move m) const noexcept {
    return !terminal() && in_bounds(cfg_, m) && at(m) == Cell::Empty;
  }

  GameState apply_move(Move m) const {
    GameState next = *this;
    next.play(m);
    return next;
  }

  // In-place, checked.
  void play(Move m) {
    if (terminal()) throw IllegalMoveError(m, "game is already over");
    if (!in_bounds(cfg_, m)) throw IllegalMoveError(m, "out of bounds");
    if (at(m) != Cell::Empty) throw IllegalMoveError(m, "cell is occupied");
    play_index_unchecked(cell_index(cfg_, m));
  }

  // Hot-path variant for search and rollouts: caller guarantees the cell is
  // empty and the game is ongoing.
  void play_index_unchecked(int index) noexcept {
    const Cell stone = stone_of(to_move_);
    grid_[static_cast<std::size_t>(index)] = stone;
    const Move m = cell_move(cfg_, index);
    last_move_ = m;
    ++ply_;
    if (detail::longest_run_through(grid_, cfg_, m.row, m.col, stone) >= cfg_.n_in_row) {
      outcome_ = Outcome::win(to_move_);
    } else if (ply_ == cfg_.cells()) {
      outcome_ = Outcome::draw();
    }
    to_move_ = opponent(to_move_);
  }

  friend bool operator==(const GameState& a, const GameState& b) {
    return a.cfg_ == b.cfg_ && a.grid_ == b.grid_ && a.to_move_ == b.to_move_ &&
           a.last_move_ == b.last_move_ && a.ply_ == b.ply_ && a.outcome_ == b.outcome_;
  }

 private:
  friend GameState transform(const GameState&, Symmetry);

  void require_ongoing(const char* op) const {
    if (terminal()) throw UsageError(std::string(op) + " called on a finished game");
  }

  BoardConfig cfg_;
  std::vector<Cell> grid_;
  Player to_move_ = Player::P1;
  std::optional<Move> last_move_;
  int ply_ = 0;
  Outcome outcome_ = Outcome::ongoing();
};

inline GameState new_game(const BoardConfig& cfg) { return GameState(cfg); }
inline std::vector<Move> legal_moves(const GameState& s) { return s.legal_moves(); }
inline GameState apply_move(const GameState& s, Move m) { return s.apply_move(m); }
inline Outcome outcome(const GameState& s) { return s.outcome(); }

// Outcome from scanning every line on the board, independent of last_move.
// Throws UsageError if both players own a winning run.
inline Outcome scan_outcome(const BoardConfig& cfg, std::span<const Cell> grid) {
  bool won[3] = {false, false, false};
  for (int r = 0; r < cfg.height; ++r) {
    for (int c = 0; c < cfg.width; ++c) {
      const Cell s = grid[static_cast<std::size_t>(r * cfg.width + c)];
      if (s == Cell::Empty || won[static_cast<int>(s)]) continue;
      if (detail::longest_run_through(grid, cfg, r, c, s) >= cfg.n_in_row) {
        won[static_cast<int>(s)] = true;
      }
    }
  }
  if (won[1] && won[2]) throw UsageError("both players have a winning line");
  if (won[1]) return Outcome::win(Player::P1);
  if (won[2]) return Outcome::win(Player::P2);
  const bool full = std::none_of(grid.begin(), grid.end(), [](Cell c) { return c == Cell::Empty; });
  return full ? Outcome::draw() : Outcome::ongoing();
}

inline Outcome scan_outcome(const GameState& s) { return scan_outcome(s.config(), s.grid()); }

inline GameState GameState::from_rows(const std::vector<std::string>& rows, int n_in_row) {
  if (rows.empty()) throw ConfigError("no rows given");
  BoardConfig cfg{static_cast<int>(rows.size()), static_cast<int>(rows.front().size()), n_in_row};
  GameState s(cfg);
  int p1 = 0;
  int p2 = 0;
  for (int r = 0; r < cfg.height; ++r) {
    if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != cfg.width) {
      throw ConfigError("ragged board rows");
    }
    for (int c = 0; c < cfg.width; ++c) {
      Cell cell = Cell::Empty;
      switch (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) {
        case '.': break;
        case 'x': case 'X': cell = Cell::P1; ++p1; break;
        case 'o': case 'O': cell = Cell::P2; ++p2; break;
        default: throw ConfigError("unexpected board character in row " + std::to_string(r));
      }
      s.grid_[static_cast<std::size_t>(r * cfg.width + c)] = cell;
    }
  }
  if (p1 - p2 != 0 && p1 - p2 != 1) throw ConfigError("stone counts cannot arise from alternating play");
  s.ply_ = p1 + p2;
  s.to_move_ = p1 == p2 ? Player::P1 : Player::P2;
  s.outcome_ = scan_outcome(s);
  return s;
}

// Rows of '.', 'x', 'o'.
inline std::vector<std::string> board_rows(const GameState& s) {
  const auto& cfg = s.config();
  std::vector<std::string> rows(static_cast<std::size_t>(cfg.height), std::string(static_cast<std::size_t>(cfg.width), '.'));
  for (int i = 0; i < cfg.cells(); ++i) {
    const Cell c = s.at(i);
    if (c != Cell::Empty) {
      rows[static_cast<std::size_t>(i / cfg.width)][static_cast<std::size_t>(i % cfg.width)] =
          player_symbol(static_cast<Player>(c));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Network input encoding.

// Four binary planes, each height x width, stored plane-major then row-major:
//   0: stones of the player to move
//   1: stones of the opponent
//   2: one-hot of the last move (zeros when there is none)
//   3: all ones iff the player to move is P1
struct EncodedState {
  static constexpr int kPlanes = 4;

  int height = 0;
  int width = 0;
  std::vector<float> data;

  int cells() const noexcept { return height * width; }
  float at(int plane, int row, int col) const noexcept {
    return data[static_cast<std::size_t>((plane * height + row) * width + col)];
  }
  std::span<const float> plane(int p) const noexcept {
    return std::span<const float>(data).subspan(static_cast<std::size_t>(p * cells()),
                                                static_cast<std::size_t>(cells()));
  }

  friend bool operator==(const EncodedState&, const EncodedState&) = default;
};

inline EncodedState encode(const GameState& s) {
  const auto& cfg = s.config();
  const int n = cfg.cells();
  EncodedState e{cfg.height, cfg.width, std::vector<float>(static_cast<std::size_t>(EncodedState::kPlanes * n), 0.0f)};
  const Cell mine = stone_of(s.to_move());
  const Cell theirs = stone_of(opponent(s.to_move()));
  for (int i = 0; i < n; ++i) {
    const Cell c = s.at(i);
    if (c == mine) e.data[static_cast<std::size_t>(i)] = 1.0f;
    else if (c == theirs) e.data[static_cast<std::size_t>(n + i)] = 1.0f;
  }
  if (s.last_move()) e.data[static_cast<std::size_t>(2 * n + cell_index(cfg, *s.last_move()))] = 1.0f;
  if (s.to_move() == Player::P1) {
    std::fill(e.data.begin() + 3 * n, e.data.end(), 1.0f);
  }
  return e;
}

inline constexpr std::array<Symmetry, 8> kAllSymmetries = {
    Symmetry::Identity, Symmetry::Rot90,  Symmetry::Rot180,       Symmetry::Rot270,
    Symmetry::Mirror,   Symmetry::MirrorRot90, Symmetry::MirrorRot180, Symmetry::MirrorRot270};

constexpr int quarter_turns(Symmetry s) noexcept { return static_cast<int>(s) % 4; }
constexpr bool mirrored(Symmetry s) noexcept { return static_cast<int>(s) >= 4; }

constexpr Symmetry inverse(Symmetry s) noexcept {
  if (mirrored(s)) return s;
  return static_cast<Symmetry>((4 - quarter_turns(s)) % 4);
}

inline void require_supported(const BoardConfig& cfg, Symmetry s) {
  if (!cfg.square() && quarter_turns(s) % 2 == 1) {
    throw UnsupportedTransformError("quarter-turn rotation on a non-square " + cfg.to_string() + " board");
  }
}

inline Move transform_move(const BoardConfig& cfg, Move m, Symmetry s) {
  require_supported(cfg, s);
  int r = m.row;
  int c = m.col;
  if (mirrored(s)) c = cfg.width - 1 - c;
  // One CCW quarter turn on an n x n board: (r, c) -> (n-1-c, r).
  int h = cfg.height;
  int w = cfg.width;
  for (int k = 0; k < quarter_turns(s); ++k) {
    const int nr = w - 1 - c;
    const int nc = r;
    r = nr;
    c = nc;
    std::swap(h, w);
  }
  return {r, c};
}

// Table mapping source cell index -> destination cell index.
inline std::vector<int> symmetry_permutation(const BoardConfig& cfg, Symmetry s) {
  std::vector<int> perm(static_cast<std::size_t>(cfg.cells()));
  for (int i = 0; i < cfg.cells(); ++i) {
    perm[static_cast<std::size_t>(i)] = cell_index(cfg, transform_move(cfg, cell_move(cfg, i), s));
  }
  return perm;
}

template <class T>
std::vector<T> transform_cells(const BoardConfig& cfg, std::span<const T> values, Symmetry s) {
  if (static_cast<int>(values.size()) != cfg.cells()) throw DimensionError("cell vector length mismatch");
  const auto perm = symmetry_permutation(cfg, s);
  std::vector<T> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[static_cast<std::size_t>(perm[i])] = values[i];
  return out;
}

// Policy vectors use the same row-major cell labelling as the grid.
inline std::vector<float> transform_policy(const BoardConfig& cfg, std::span<const float> policy, Symmetry s) {
  return transform_cells<float>(cfg, policy, s);
}

inline EncodedState transform(const EncodedState& e, Symmetry s) {
  const BoardConfig cfg{e.height, e.width, 1};
  require_supported(cfg, s);
  const auto perm = symmetry_permutation(cfg, s);
  EncodedState out{e.height, e.width, std::vector<float>(e.data.size(), 0.0f)};
  const int n = e.cells();
  for (int p = 0; p < EncodedState::kPlanes; ++p) {
    for (int i = 0; i < n; ++i) {
      out.data[static_cast<std::size_t>(p * n + perm[static_cast<std::size_t>(i)])] =
          e.data[static_cast<std::size_t>(p * n + i)];
    }
  }
  return out;
}

inline GameState transform(const GameState& state, Symmetry s) {
  GameState out = state;
  const auto& cfg = state.config();
  out.grid_ = transform_cells<Cell>(cfg, state.grid(), s);
  if (state.last_move()) out.last_move_ = transform_move(cfg, *state.last_move(), s);
  return out;
}

// ---------------------------------------------------------------------------
// Tactical patterns.

enum class Pattern { Four, Fork };

namespace detail {

inline std::vector<int> winning_cells(const BoardConfig& cfg, std::span<const Cell> grid, Cell stone) {
  std::vector<int> out;
  for (int i = 0; i < cfg.cells(); ++i) {
    if (grid[static_cast<std::size_t>(i)] != Cell::Empty) continue;
    if (longest_run_through(grid, cfg, i / cfg.width, i % cfg.width, stone) >= cfg.n_in_row) {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace detail

// Four: empty cells where `player` completes an n-in-a-row at once.
// Fork: empty cells whose placement leaves `player` with at least two
// distinct Four-completing cells. Result is row-major. Side to move is
// ignored; the query is about the board alone.
inline std::vector<Move> detect_pattern(const GameState& state, Pattern kind, Player player) {
  const auto& cfg = state.config();
  const Cell stone = stone_of(player);
  std::vector<Move> out;
  if (kind == Pattern::Four) {
    for (int i : detail::winning_cells(cfg, state.grid(), stone)) out.push_back(cell_move(cfg, i));
    return out;
  }
  std::vector<Cell> grid(state.grid().begin(), state.grid().end());
  for (int i = 0; i < cfg.cells(); ++i) {
    if (grid[static_cast<std::size_t>(i)] != Cell::Empty) continue;
    grid[static_cast<std::size_t>(i)] = stone;
    if (detail::winning_cells(cfg, grid, stone).size() >= 2) out.push_back(cell_move(cfg, i));
    grid[static_cast<std::size_t>(i)] = Cell::Empty;
  }
  return out;
}

}  // namespace gomoku
