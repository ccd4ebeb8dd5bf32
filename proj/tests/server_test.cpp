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

#include "gomoku/server.hpp"

#include <fstream>
#include <future>
#include <sstream>

#include "gtest/gtest.h"
#include "http_client.hpp"
#include "test_util.hpp"

namespace gomoku {
namespace {

using nlohmann::json;
using testing::http_get;
using testing::http_post;
namespace http = boost::beast::http;

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override { start({}); }

  void start(std::filesystem::path static_dir) {
    server_.reset();
    ServerOptions o;
    o.port = 0;
    o.static_dir = std::move(static_dir);
    o.log = &log_;
    server_ = std::make_unique<GameServer>(o);
    server_->bind();
    port_ = server_->port();
    server_->start();
  }

  void TearDown() override { server_.reset(); }

  std::string create(const json& body) {
    const auto r = http_post(port_, "/v1/sessions", body);
    EXPECT_EQ(r.status, 201) << r.body;
    return r.json()["id"];
  }

  std::ostringstream log_;
  std::unique_ptr<GameServer> server_;
  int port_ = 0;
};

// First empty cell in reading order.
Move first_empty(const json& board) {
  for (std::size_t r = 0; r < board.size(); ++r) {
    const std::string row = board[r];
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] == '.') return {static_cast<int>(r), static_cast<int>(c)};
    }
  }
  return {-1, -1};
}

TEST_F(ServerTest, HealthCheck) {
  const auto r = http_get(port_, "/v1/healthz");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.content_type, "application/json");
  EXPECT_EQ(r.json(), (json{{"status", "ok"}}));
}

TEST_F(ServerTest, FullGameOverHttpAndWebSocket) {
  const std::string id = create({{"agent", "mcts:200"}, {"seed", 17}});
  auto stream_done = std::async(std::launch::async, [&] {
    testing::EventStream ws(port_, "/v1/sessions/" + id + "/events");
    return ws.drain();
  });

  json snap = http_get(port_, "/v1/sessions/" + id).json();
  ASSERT_EQ(snap["ply"], 0);
  while (snap["status"] == "active") {
    const int ply = snap["ply"];
    const Move m = first_empty(snap["board"]);
    const auto r = http_post(port_, "/v1/sessions/" + id + "/moves", {{"row", m.row}, {"col", m.col}, {"ply", ply}});
    ASSERT_EQ(r.status, 200) << r.body;
    const json reply = r.json();
    const int advanced = reply["session"]["ply"].get<int>() - ply;
    ASSERT_TRUE(advanced == 1 || advanced == 2);
    ASSERT_EQ(reply.contains("agent_move"), advanced == 2);
    if (advanced == 1) ASSERT_EQ(reply["session"]["status"], "finished");
    snap = reply["session"];
  }
  EXPECT_EQ(http_get(port_, "/v1/sessions/" + id).json(), snap);

  const auto events = stream_done.get();
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.back()["type"], "game_over");
  EXPECT_EQ(events.back()["outcome"], snap["outcome"]);
  int applied = 0;
  for (const auto& e : events) {
    if (e["type"] == "move_applied") {
      ++applied;
      EXPECT_EQ(e["ply"], applied);
    }
  }
  EXPECT_EQ(applied, snap["ply"].get<int>());

  const auto done = http_post(port_, "/v1/sessions/" + id + "/moves", {{"row", 0}, {"col", 0}});
  EXPECT_EQ(done.status, 409);
  EXPECT_EQ(done.json()["code"], "session_finished");

  // Reconnecting after the end replays only the events past the given ply.
  testing::EventStream again(port_, "/v1/sessions/" + id + "/events?since=" + std::to_string(applied - 1));
  const auto tail = again.drain();
  ASSERT_FALSE(tail.empty());
  EXPECT_EQ(tail.front()["ply"], applied);
  EXPECT_EQ(tail.back()["type"], "game_over");
}

TEST_F(ServerTest, ErrorCodes) {
  const auto code = [](const testing::HttpReply& r) { return r.json()["code"].get<std::string>(); };
  const std::string id = create({{"agent", "mcts:50"}, {"seed", 1}});
  const std::string moves = "/v1/sessions/" + id + "/moves";
  ASSERT_EQ(http_post(port_, moves, {{"row", 2}, {"col", 2}}).status, 200);

  auto r = http_post(port_, moves, {{"row", 2}, {"col", 2}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code(r), "illegal_move");
  EXPECT_EQ(r.json()["ply"], 2);
  r = http_post(port_, moves, {{"row", 9}, {"col", 0}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code(r), "illegal_move");
  r = http_post(port_, moves, {{"row", 3}, {"col", 3}, {"ply", 0}});
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(code(r), "out_of_turn");
  r = testing::http_call(port_, http::verb::post, moves, "{not json");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code(r), "bad_request");
  r = http_post(port_, "/v1/sessions/nope/moves", {{"row", 0}, {"col", 0}});
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(code(r), "session_not_found");
  r = http_get(port_, "/v1/sessions/nope");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(code(r), "session_not_found");
  r = http_post(port_, "/v1/sessions", {{"agent", "chess"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code(r), "invalid_agent");
  r = http_post(port_, "/v1/sessions", {{"agent", "neural:/missing.ckpt:100"}});
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(code(r), "checkpoint_not_found");
  r = http_get(port_, "/v1/unknown");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(code(r), "not_found");
  r = testing::http_call(port_, http::verb::delete_, "/v1/healthz");
  EXPECT_EQ(r.status, 405);
  EXPECT_EQ(code(r), "method_not_allowed");
  EXPECT_TRUE(r.json().contains("message"));
}

TEST_F(ServerTest, UnknownSessionStreamSendsErrorFrame) {
  testing::EventStream ws(port_, "/v1/sessions/nope/events");
  const auto frames = ws.drain();
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(frames[0]["type"], "error");
  EXPECT_EQ(frames[0]["code"], "session_not_found");
}

TEST_F(ServerTest, HumanSecondSessionStreamsAgentOpening) {
  const std::string id = create({{"agent", "mcts:50"}, {"human_side", "P2"}});
  testing::EventStream ws(port_, "/v1/sessions/" + id + "/events?since=0");
  json first;
  ASSERT_TRUE(ws.next(first));
  EXPECT_EQ(first["type"], "move_applied");
  EXPECT_EQ(first["ply"], 1);
  EXPECT_EQ(first["mover"], "P1");
  json report;
  ASSERT_TRUE(ws.next(report));
  EXPECT_EQ(report["type"], "agent_report");
}

TEST_F(ServerTest, CorsPreflight) {
  const auto r = testing::http_call(port_, http::verb::options, "/v1/sessions");
  EXPECT_EQ(r.status, 204);
}

TEST_F(ServerTest, LogsOneLinePerRequest) {
  http_get(port_, "/v1/healthz");
  http_get(port_, "/v1/sessions/nope");
  server_.reset();
  const std::string log = log_.str();
  EXPECT_NE(log.find("GET /v1/healthz 200"), std::string::npos) << log;
  EXPECT_NE(log.find("GET /v1/sessions/nope 404"), std::string::npos) << log;
}

TEST_F(ServerTest, ShutdownWithOpenStream) {
  const std::string id = create({{"agent", "random"}});
  auto stream = std::make_unique<testing::EventStream>(port_, "/v1/sessions/" + id + "/events");
  auto drained = std::async(std::launch::async, [&] { return stream->drain(); });
  const auto t0 = std::chrono::steady_clock::now();
  server_.reset();
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(3));
  EXPECT_TRUE(drained.get().empty());
}

TEST_F(ServerTest, ServesStaticAssets) {
  const auto dir = testing::scratch_dir("server_static");
  std::ofstream(dir / "index.html") << "<html>hi</html>";
  std::filesystem::create_directories(dir / "assets");
  std::ofstream(dir / "assets" / "app.js") << "console.log(1)";
  std::ofstream(dir.parent_path() / "secret.txt") << "nope";
  start(dir);
  auto r = http_get(port_, "/");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body, "<html>hi</html>");
  EXPECT_EQ(r.content_type, "text/html; charset=utf-8");
  r = http_get(port_, "/assets/app.js");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.content_type, "text/javascript");
  EXPECT_EQ(http_get(port_, "/../secret.txt").status, 404);
  EXPECT_EQ(http_get(port_, "/missing.css").status, 404);
  EXPECT_EQ(http_get(port_, "/v1/healthz").status, 200);
}

TEST_F(ServerTest, NoStaticDirMeansNoAssets) { EXPECT_EQ(http_get(port_, "/").status, 404); }

TEST(ServerBindTest, PortInUseThrows) {
  ServerOptions o;
  o.port = 0;
  GameServer a(o);
  a.bind();
  o.port = a.port();
  GameServer b(o);
  EXPECT_THROW(b.bind(), boost::system::system_error);
}

TEST(ServerBindTest, InvalidAddressThrows) {
  ServerOptions o;
  o.address = "not-an-address";
  o.port = 0;
  GameServer s(o);
  EXPECT_THROW(s.bind(), boost::system::system_error);
}

TEST(ServerBindTest, OptionsFollowConfig) {
  EngineConfig cfg;
  cfg.board = kBoard8x8;
  cfg.serve.port = 9001;
  cfg.serve.session_idle_seconds = 60;
  cfg.sync();
  const ServerOptions o = server_options_from(cfg);
  EXPECT_EQ(o.port, 9001);
  EXPECT_EQ(o.service.default_board, kBoard8x8);
  EXPECT_EQ(o.service.idle_timeout, std::chrono::seconds(60));
}

}  // namespace
}  // namespace gomoku
