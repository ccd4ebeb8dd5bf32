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

#include "gomoku/cli.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "gtest/gtest.h"
#include "http_client.hpp"
#include "test_util.hpp"

namespace gomoku {
namespace {

using nlohmann::json;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args, const std::string& input = "", const std::atomic<bool>* stop = nullptr) {
  args.insert(args.begin(), "gomoku_zero");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err, stop);
  r.out = out.str();
  r.err = err.str();
  return r;
}

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

std::filesystem::path write_config(const std::filesystem::path& dir, const json& j) {
  const auto path = dir / "engine.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

json smoke_config(const std::string& board = "6x6/4") {
  return {{"board", board},
          {"train",
           {{"games_per_iteration", 2},
            {"sims_per_move", 16},
            {"batch_size", 32},
            {"steps_per_iteration", 2},
            {"checkpoint_every", 1},
            {"total_iterations", 2},
            {"rng_seed", 5}}},
          {"network", {{"trunk_channels", {8, 8}}, {"value_hidden", 8}}},
          {"paths", {{"checkpoint_dir", "ck"}, {"records_dir", ""}, {"metrics_log", "metrics.jsonl"}}}};
}

TEST(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"eval", "--games", "many"}).code, 2);
}

TEST(CliTrainTest, SmokeRunWritesReportsAndCheckpoints) {
  const auto dir = testing::scratch_dir("cli_train");
  const auto cfg = write_config(dir, smoke_config());
  const CliRun r = run({"train", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count(r.out, "iter "), 2) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "ck" / "latest.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "ck" / "iter_0002.ckpt"));
  std::ifstream metrics(dir / "metrics.jsonl");
  int lines = 0;
  for (std::string l; std::getline(metrics, l);) ++lines;
  EXPECT_EQ(lines, 2);
}

TEST(CliTrainTest, MissingConfigExitsTwo) {
  const CliRun r = run({"train", "--config", "/nonexistent/engine.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/engine.json"), std::string::npos);
}

TEST(CliTrainTest, InvalidConfigHasNoSideEffects) {
  const auto dir = testing::scratch_dir("cli_train_invalid");
  json j = smoke_config();
  j["train"]["batch_sz"] = 1;
  const auto cfg = write_config(dir, j);
  const CliRun r = run({"train", "--config", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/train/batch_sz"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(dir / "ck"));
  EXPECT_FALSE(std::filesystem::exists(dir / "metrics.jsonl"));
}

TEST(CliTrainTest, ResumeOnAnotherBoardExitsTwo) {
  const auto six = testing::scratch_dir("cli_resume_six");
  ASSERT_EQ(run({"train", "--config", write_config(six, smoke_config()).string(), "--iterations", "1"}).code, 0);
  const auto eight = testing::scratch_dir("cli_resume_eight");
  const CliRun r = run({"train", "--config", write_config(eight, smoke_config("8x8/5")).string(), "--resume",
                     (six / "ck" / "latest.ckpt").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("6x6"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(eight / "ck"));
}

TEST(CliEvalTest, MatchSummary) {
  const CliRun r = run({"eval", "--a", "mcts:100", "--b", "random", "--games", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count(r.out, "\n"), 1);
  EXPECT_NE(r.out.find("mcts:100 vs random: games 4"), std::string::npos) << r.out;
}

TEST(CliEvalTest, SeedMakesRunsReproducible) {
  const auto a = run({"eval", "--a", "mcts:30", "--b", "mcts:30", "--games", "6", "--seed", "4"});
  const auto b = run({"eval", "--a", "mcts:30", "--b", "mcts:30", "--games", "6", "--seed", "4"});
  EXPECT_EQ(a.out, b.out);
}

TEST(CliEvalTest, SweepWritesFiveRowCsv) {
  const auto dir = testing::scratch_dir("cli_sweep");
  const auto ckpt = dir / "net.ckpt";
  PolicyValueNet<float> net(NetworkArch::for_board(kBoard6x6));
  Rng rng(1);
  net.initialize(rng);
  save_checkpoint(ckpt, kBoard6x6, net);
  const auto csv = dir / "sweep.csv";
  const CliRun r = run({"eval", "--a", "neural:" + ckpt.string() + ":4", "--sweep", "500,1000,1500,2000,2500", "--games",
                     "2", "--csv", csv.string(), "--records", (dir / "games.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(csv);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "budget,games,wins_neural,wins_mcts,draws,winrate");
  EXPECT_EQ(lines[1].rfind("500,2,", 0), 0u);
  EXPECT_EQ(lines[5].rfind("2500,2,", 0), 0u);
  std::ifstream games(dir / "games.jsonl");
  EXPECT_EQ(read_records(games).size(), 10u);
}

TEST(CliEvalTest, BadSpecsExitTwo) {
  EXPECT_EQ(run({"eval", "--a", "neural:missing.ckpt:400", "--b", "random", "--games", "2"}).code, 2);
  EXPECT_EQ(run({"eval", "--a", "mcts:zero", "--games", "2"}).code, 2);
  EXPECT_EQ(run({"eval", "--a", "random", "--b", "random", "--games", "3"}).code, 2);
  EXPECT_EQ(run({"eval", "--a", "random", "--sweep", "500,,x"}).code, 2);
}

TEST(CliEvalTest, SelfPlayRate) {
  const CliRun r = run({"eval", "--a", "mcts:30", "--selfplay", "--games", "2", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("first_player_fraction"), std::string::npos);
}

TEST(CliPlayTest, OccupiedCellReprompts) {
  const CliRun r = run({"play", "--agent", "random", "--seed", "3"}, "0,0\n0,0\nnonsense\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("illegal move 0,0, try again"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("expected row,col"), std::string::npos);
  EXPECT_EQ(count(r.out, "agent plays"), 1);
  EXPECT_NE(r.out.find("bye"), std::string::npos);
}

TEST(CliPlayTest, HumanWinIsAnnounced) {
  for (int seed = 0; seed < 50; ++seed) {
    const CliRun r = run({"play", "--agent", "random", "--seed", std::to_string(seed)}, "3,0\n3,1\n3,2\n3,3\n");
    ASSERT_EQ(r.code, 0);
    if (r.out.find("game over: P1 (x) wins, you win") != std::string::npos) return;
  }
  FAIL() << "no seed let the scripted human win";
}

TEST(CliPlayTest, AgentTakesImmediateWins) {
  // The human wanders along the edges; whenever the agent has a one-move
  // win it must play one.
  std::string input;
  for (int c = 0; c < 6; ++c) input += "0," + std::to_string(c) + "\n";
  for (int c = 0; c < 6; ++c) input += "5," + std::to_string(c) + "\n";
  const CliRun r = run({"play", "--agent", "mcts:2000", "--seed", "2"}, input);
  ASSERT_EQ(r.code, 0);
  GameState s(kBoard6x6);
  int win_chances = 0;
  std::istringstream lines(r.out);
  std::istringstream human(input);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("move> ", 0) == 0 || line.find("move> ") != std::string::npos) {
      // Each prompt consumes one input line; only legal ones change the board.
      std::string h;
      if (!std::getline(human, h)) break;
      const auto m = parse_move_text(h);
      if (m && !s.terminal() && s.to_move() == Player::P1 && s.is_legal(*m)) s.play(*m);
    }
    if (line.rfind("agent plays ", 0) == 0) {
      const auto m = parse_move_text(line.substr(12, line.find(' ', 12) - 12));
      ASSERT_TRUE(m);
      std::vector<Move> wins;
      for (const Move c : s.legal_moves()) {
        if (s.apply_move(c).outcome().is_win()) wins.push_back(c);
      }
      if (!wins.empty()) {
        ++win_chances;
        EXPECT_NE(std::find(wins.begin(), wins.end(), *m), wins.end()) << "agent missed a win at ply " << s.ply();
      }
      s.play(*m);
    }
  }
  EXPECT_GT(win_chances, 0);
  EXPECT_NE(r.out.find("game over: P2 (o) wins"), std::string::npos) << r.out;
}

TEST(CliPlayTest, HumanSecond) {
  const CliRun r = run({"play", "--agent", "mcts:50", "--human-first", "false"}, "");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("You are o (P2)"), std::string::npos);
  EXPECT_EQ(count(r.out, "agent plays"), 1);
}

class CliReplayTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::scratch_dir("cli_replay");
    const auto m = pit(PureMctsSpec{40}, RandomSpec{}, 2, true, 3, kBoard6x6);
    rec_ = m.records[0];
    std::ofstream f(dir_ / "games.jsonl");
    for (const auto& r : m.records) write_record(f, r);
  }

  std::filesystem::path dir_;
  GameRecord rec_;
};

TEST_F(CliReplayTest, PrintsOneBoardPerPlyWithHeat) {
  const CliRun r = run({"replay", (dir_ / "games.jsonl").string(), "--game", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const int n = static_cast<int>(rec_.moves.size());
  EXPECT_EQ(count(r.out, "\nply "), n);
  EXPECT_EQ(count(r.out, "search: 40 sims"), (n + 1) / 2);
  EXPECT_NE(r.out.find('@'), std::string::npos);
  EXPECT_NE(r.out.find("outcome: " + outcome_token(rec_.outcome)), std::string::npos);
}

TEST_F(CliReplayTest, AllGamesByDefault) {
  const CliRun r = run({"replay", (dir_ / "games.jsonl").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(count(r.out, "outcome: "), 2);
  EXPECT_EQ(run({"replay", (dir_ / "games.jsonl").string(), "--game", "5"}).code, 2);
}

TEST_F(CliReplayTest, RecordWithoutSearchHasNoHeat) {
  GameRecord bare = rec_;
  bare.search.clear();
  std::ofstream(dir_ / "bare.jsonl") << to_json(bare).dump() << '\n';
  const CliRun r = run({"replay", (dir_ / "bare.jsonl").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("search:"), std::string::npos);
  EXPECT_EQ(r.out.find('@'), std::string::npos);
}

TEST_F(CliReplayTest, TamperedRecordExitsTwoNamingThePly) {
  json j = to_json(rec_);
  j["moves"][3] = j["moves"][1];
  std::ofstream(dir_ / "tampered.jsonl") << j.dump() << '\n';
  const CliRun r = run({"replay", (dir_ / "tampered.jsonl").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ply 4"), std::string::npos) << r.err;
  std::ofstream(dir_ / "garbage.jsonl") << "{\"moves\": 3}\n";
  EXPECT_EQ(run({"replay", (dir_ / "garbage.jsonl").string()}).code, 2);
  EXPECT_EQ(run({"replay", (dir_ / "absent.jsonl").string()}).code, 2);
}

int free_port() {
  boost::asio::io_context io;
  boost::asio::ip::tcp::acceptor a(io, {boost::asio::ip::make_address("127.0.0.1"), 0});
  return a.local_endpoint().port();
}

TEST(CliServeTest, HealthCheckThenSignal) {
  const int port = free_port();
  std::atomic<bool> stop{false};
  CliRun r;
  std::jthread server([&] { r = run({"serve", "--port", std::to_string(port)}, "", &stop); });
  testing::HttpReply health;
  for (int attempt = 0; attempt < 100; ++attempt) {
    try {
      health = testing::http_get(port, "/v1/healthz");
      break;
    } catch (const std::exception&) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  EXPECT_EQ(health.status, 200);
  EXPECT_EQ(health.json()["status"], "ok");
  stop = true;
  server.join();
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("shut down"), std::string::npos);
  EXPECT_NE(r.err.find("GET /v1/healthz 200"), std::string::npos) << r.err;
}

TEST(CliServeTest, BindFailuresExitTwo) {
  EXPECT_EQ(run({"serve", "--address", "999.1.1.1", "--port", "0"}).code, 2);
  boost::asio::io_context io;
  boost::asio::ip::tcp::acceptor busy(io, {boost::asio::ip::make_address("127.0.0.1"), 0});
  const CliRun r = run({"serve", "--port", std::to_string(busy.local_endpoint().port())});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("cannot listen"), std::string::npos);
}

}  // namespace
}  // namespace gomoku
