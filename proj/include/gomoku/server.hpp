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

// HTTP/WebSocket front end for SessionManager.
//
//   GET  /v1/healthz                     {"status": "ok"}
//   POST /v1/sessions                    201, session snapshot
//   GET  /v1/sessions/{id}               200, session snapshot
//   POST /v1/sessions/{id}/moves         200, {"human_move", "agent_move"?,
//                                         "agent_report"?, "session"}
//   WS   /v1/sessions/{id}/events?since=PLY
//                                        one text frame per event with ply
//                                        greater than PLY (default -1, i.e.
//                                        everything); closed after game_over
//   GET  /...                            static assets when configured
//
// One thread per connection with blocking I/O; shutdown closes the listening
// socket and every open connection.

#pragma once

#include <sys/socket.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <list>
#include <mutex>
#include <ostream>
#include <set>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "gomoku/config.hpp"
#include "gomoku/service.hpp"

namespace gomoku {

struct ServerOptions {
  std::string address = "127.0.0.1";
  int port = 8080;
  std::filesystem::path static_dir;
  ServiceOptions service;
  std::ostream* log = nullptr;  // one line per request when set
};

inline ServerOptions server_options_from(const EngineConfig& cfg) {
  ServerOptions o;
  o.address = cfg.serve.address;
  o.port = cfg.serve.port;
  o.static_dir = cfg.serve.static_dir;
  o.service.default_board = cfg.board;
  o.service.arena.c_puct = cfg.search.c_puct;
  o.service.arena.rollout_limit = cfg.search.rollout_limit;
  o.service.max_simulations = cfg.serve.max_simulations;
  o.service.idle_timeout = std::chrono::seconds(cfg.serve.session_idle_seconds);
  o.service.records_dir = cfg.paths.records_dir;
  return o;
}

class GameServer {
 public:
  explicit GameServer(ServerOptions opts) : opts_(std::move(opts)), sessions_(opts_.service), acceptor_(io_) {}

  ~GameServer() { shutdown(); }

  GameServer(const GameServer&) = delete;
  GameServer& operator=(const GameServer&) = delete;

  SessionManager& sessions() noexcept { return sessions_; }

  // Binds and listens. Throws boost::system::system_error on failure.
  void bind() {
    namespace asio = boost::asio;
    const auto addr = asio::ip::make_address(opts_.address);
    const asio::ip::tcp::endpoint ep(addr, static_cast<unsigned short>(opts_.port));
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
  }

  int port() const { return acceptor_.local_endpoint().port(); }

  // Serves until `stop` becomes true (polled) or shutdown() is called.
  void run_until(const std::atomic<bool>* stop = nullptr) {
    start_accept();
    boost::asio::steady_timer timer(io_);
    std::function<void()> poll = [&] {
      timer.expires_after(std::chrono::milliseconds(100));
      timer.async_wait([&](const boost::system::error_code& ec) {
        if (ec) return;
        if ((stop != nullptr && stop->load()) || stopping_) {
          stop_io();
          return;
        }
        sessions_.expire();
        poll();
      });
    };
    poll();
    io_.run();
    close_connections();
  }

  // Runs the server on a background thread (for tests and embedding).
  void start() {
    runner_ = std::thread([this] { run_until(nullptr); });
  }

  void shutdown() {
    stopping_ = true;
    if (runner_.joinable()) runner_.join();
    close_connections();
  }

 private:
  using tcp = boost::asio::ip::tcp;

  void start_accept() {
    acceptor_.async_accept([this](const boost::system::error_code& ec, tcp::socket socket) {
      if (ec) return;
      launch(std::move(socket));
      start_accept();
    });
  }

  void stop_io() {
    boost::system::error_code ignored;
    acceptor_.close(ignored);
    io_.stop();
  }

  void launch(tcp::socket socket) {
    std::lock_guard lock(conn_mu_);
    // Reap finished connection threads.
    for (auto it = threads_.begin(); it != threads_.end();) {
      if (it->done->load()) {
        it->thread.join();
        it = threads_.erase(it);
      } else {
        ++it;
      }
    }
    const int fd = socket.native_handle();
    open_fds_.insert(fd);
    auto done = std::make_shared<std::atomic<bool>>(false);
    threads_.push_back({std::thread([this, s = std::move(socket), done, fd]() mutable {
                          serve_connection(std::move(s));
                          {
                            std::lock_guard l(conn_mu_);
                            open_fds_.erase(fd);
                          }
                          *done = true;
                        }),
                        done});
  }

  void close_connections() {
    std::list<Conn> threads;
    {
      std::lock_guard lock(conn_mu_);
      for (const int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
      threads.swap(threads_);
    }
    for (auto& c : threads) {
      if (c.thread.joinable()) c.thread.join();
    }
  }

  void serve_connection(tcp::socket socket);
  void handle_websocket(tcp::socket socket, boost::beast::http::request<boost::beast::http::string_body> req,
                        const std::string& id, int since);
  boost::beast::http::response<boost::beast::http::string_body> route(
      const boost::beast::http::request<boost::beast::http::string_body>& req);
  std::optional<boost::beast::http::response<boost::beast::http::string_body>> serve_static(
      const boost::beast::http::request<boost::beast::http::string_body>& req, const std::string& path);

  void log_line(const std::string& line) {
    if (opts_.log == nullptr) return;
    std::lock_guard lock(log_mu_);
    *opts_.log << line << std::endl;
  }

  struct Conn {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  ServerOptions opts_;
  SessionManager sessions_;
  boost::asio::io_context io_;
  tcp::acceptor acceptor_;
  std::thread runner_;
  std::atomic<bool> stopping_{false};
  std::mutex conn_mu_;
  std::list<Conn> threads_;
  std::set<int> open_fds_;
  std::mutex log_mu_;
};

namespace detail {

namespace http = boost::beast::http;

inline http::response<http::string_body> json_response(const http::request<http::string_body>& req,
                                                       http::status status, const nlohmann::json& body) {
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = body.dump();
  res.prepare_payload();
  return res;
}

inline http::response<http::string_body> error_response(const http::request<http::string_body>& req,
                                                        const ServiceError& e) {
  return json_response(req, static_cast<http::status>(error_http_status(e.code())), e.to_json());
}

inline std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : path) {
    if (ch == '/') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

inline std::string content_type_for(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

}  // namespace detail

inline std::optional<boost::beast::http::response<boost::beast::http::string_body>> GameServer::serve_static(
    const boost::beast::http::request<boost::beast::http::string_body>& req, const std::string& path) {
  namespace http = boost::beast::http;
  if (opts_.static_dir.empty()) return std::nullopt;
  const auto parts = detail::split_path(path);
  std::filesystem::path file = opts_.static_dir;
  for (const auto& p : parts) {
    if (p == ".." || p == ".") return std::nullopt;
    file /= p;
  }
  std::error_code ec;
  if (std::filesystem::is_directory(file, ec)) file /= "index.html";
  if (!std::filesystem::is_regular_file(file, ec)) return std::nullopt;
  std::ifstream in(file, std::ios::binary);
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  http::response<http::string_body> res{http::status::ok, req.version()};
  res.set(http::field::content_type, detail::content_type_for(file));
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

inline boost::beast::http::response<boost::beast::http::string_body> GameServer::route(
    const boost::beast::http::request<boost::beast::http::string_body>& req) {
  namespace http = boost::beast::http;
  const std::string target(req.target());
  const std::string path = target.substr(0, target.find('?'));
  const auto parts = detail::split_path(path);
  const auto method = req.method();
  const auto not_allowed = [&] {
    return detail::json_response(req, http::status::method_not_allowed,
                                 {{"code", "method_not_allowed"}, {"message", "method not allowed on " + path}});
  };
  const auto parse_body = [&]() -> nlohmann::json {
    if (req.body().empty()) return nlohmann::json::object();
    try {
      return nlohmann::json::parse(req.body());
    } catch (const nlohmann::json::parse_error& e) {
      throw ServiceError(ServiceErrorCode::BadRequest, std::string("malformed JSON: ") + e.what());
    }
  };

  try {
    if (method == http::verb::options) {
      http::response<http::string_body> res{http::status::no_content, req.version()};
      res.set(http::field::access_control_allow_origin, "*");
      res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
      res.set(http::field::access_control_allow_headers, "Content-Type");
      res.keep_alive(req.keep_alive());
      res.prepare_payload();
      return res;
    }
    if (!parts.empty() && parts[0] == "v1") {
      if (parts.size() == 2 && parts[1] == "healthz") {
        if (method != http::verb::get) return not_allowed();
        return detail::json_response(req, http::status::ok, {{"status", "ok"}});
      }
      if (parts.size() == 2 && parts[1] == "sessions") {
        if (method != http::verb::post) return not_allowed();
        return detail::json_response(req, http::status::created, sessions_.create(parse_body()));
      }
      if (parts.size() == 3 && parts[1] == "sessions") {
        if (method != http::verb::get) return not_allowed();
        return detail::json_response(req, http::status::ok, sessions_.snapshot(parts[2]));
      }
      if (parts.size() == 4 && parts[1] == "sessions" && parts[3] == "moves") {
        if (method != http::verb::post) return not_allowed();
        return detail::json_response(req, http::status::ok, sessions_.submit(parts[2], parse_body()));
      }
      return detail::json_response(req, http::status::not_found,
                                   {{"code", "not_found"}, {"message", "no endpoint " + path}});
    }
    if (method == http::verb::get || method == http::verb::head) {
      if (auto res = serve_static(req, path)) return std::move(*res);
    }
    return detail::json_response(req, http::status::not_found, {{"code", "not_found"}, {"message", "not found"}});
  } catch (const ServiceError& e) {
    return detail::error_response(req, e);
  } catch (const std::exception& e) {
    return detail::json_response(req, http::status::internal_server_error,
                                 {{"code", "internal"}, {"message", e.what()}});
  }
}

inline void GameServer::serve_connection(tcp::socket socket) {
  namespace beast = boost::beast;
  namespace http = beast::http;
  namespace websocket = beast::websocket;
  beast::flat_buffer buffer;
  beast::error_code ec;
  for (;;) {
    http::request<http::string_body> req;
    http::read(socket, buffer, req, ec);
    if (ec) return;
    const auto t0 = std::chrono::steady_clock::now();
    const std::string target(req.target());

    if (websocket::is_upgrade(req)) {
      const std::string path = target.substr(0, target.find('?'));
      const auto parts = detail::split_path(path);
      if (parts.size() == 4 && parts[0] == "v1" && parts[1] == "sessions" && parts[3] == "events") {
        int since = -1;
        if (const auto q = target.find("since="); q != std::string::npos) {
          try {
            since = std::stoi(target.substr(q + 6));
          } catch (const std::exception&) {
            since = -1;
          }
        }
        log_line("WS " + target);
        handle_websocket(std::move(socket), std::move(req), parts[2], since);
        return;
      }
    }

    auto res = route(req);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    char line[64];
    std::snprintf(line, sizeof line, " %u %.1fms", res.result_int(), ms);
    log_line(std::string(req.method_string()) + " " + target + line);
    const bool keep = res.keep_alive();
    http::write(socket, res, ec);
    if (ec || !keep) break;
  }
  socket.shutdown(tcp::socket::shutdown_send, ec);
}

inline void GameServer::handle_websocket(tcp::socket socket,
                                         boost::beast::http::request<boost::beast::http::string_body> req,
                                         const std::string& id, int since) {
  namespace beast = boost::beast;
  namespace websocket = beast::websocket;
  websocket::stream<tcp::socket> ws(std::move(socket));
  beast::error_code ec;
  ws.accept(req, ec);
  if (ec) return;
  ws.text(true);
  const auto send = [&](const nlohmann::json& j) {
    ws.write(boost::asio::buffer(j.dump()), ec);
    return !ec;
  };
  std::size_t cursor = 0;
  try {
    cursor = sessions_.cursor_after_ply(id, since);
  } catch (const ServiceError& e) {
    nlohmann::json frame = e.to_json();
    frame["type"] = "error";
    send(frame);
    ws.close(websocket::close_code::policy_error, ec);
    return;
  }
  auto last_ping = std::chrono::steady_clock::now();
  while (!stopping_) {
    bool finished = false;
    std::vector<nlohmann::json> batch;
    try {
      batch = sessions_.events(id, cursor, std::chrono::milliseconds(200), &finished);
    } catch (const ServiceError& e) {
      // Session expired while subscribed.
      nlohmann::json frame = e.to_json();
      frame["type"] = "error";
      send(frame);
      ws.close(websocket::close_code::going_away, ec);
      return;
    }
    for (const auto& ev : batch) {
      if (!send(ev)) return;
      ++cursor;
    }
    if (finished) {
      ws.close(websocket::close_code::normal, ec);
      return;
    }
    const auto now = std::chrono::steady_clock::now();
    if (now - last_ping > std::chrono::seconds(5)) {
      ws.ping({}, ec);
      if (ec) return;
      last_ping = now;
    }
  }
  ws.close(websocket::close_code::going_away, ec);
}

}  // namespace gomoku
