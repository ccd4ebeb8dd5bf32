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

// Minimal blocking HTTP and WebSocket client for exercising the server.

#pragma once

#include <string>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

namespace gomoku::testing {

struct HttpReply {
  int status = 0;
  std::string content_type;
  std::string body;

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

inline HttpReply http_call(int port, boost::beast::http::verb method, const std::string& target,
                           const std::string& body = "") {
  namespace beast = boost::beast;
  namespace http = beast::http;
  boost::asio::io_context io;
  boost::asio::ip::tcp::socket sock(io);
  sock.connect({boost::asio::ip::make_address("127.0.0.1"), static_cast<unsigned short>(port)});
  http::request<http::string_body> req{method, target, 11};
  req.set(http::field::host, "127.0.0.1");
  if (!body.empty()) {
    req.set(http::field::content_type, "application/json");
    req.body() = body;
  }
  req.prepare_payload();
  http::write(sock, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(sock, buf, res);
  beast::error_code ec;
  sock.shutdown(boost::asio::ip::tcp::socket::shutdown_both, ec);
  return {static_cast<int>(res.result_int()), std::string(res[http::field::content_type]), res.body()};
}

inline HttpReply http_get(int port, const std::string& target) {
  return http_call(port, boost::beast::http::verb::get, target);
}

inline HttpReply http_post(int port, const std::string& target, const nlohmann::json& body) {
  return http_call(port, boost::beast::http::verb::post, target, body.dump());
}

// Subscribes to a session's event stream and collects text frames until the
// server closes the socket.
class EventStream {
 public:
  EventStream(int port, const std::string& target) : ws_(io_) {
    ws_.next_layer().connect({boost::asio::ip::make_address("127.0.0.1"), static_cast<unsigned short>(port)});
    ws_.handshake("127.0.0.1", target);
  }

  // Returns false once the stream is closed.
  bool next(nlohmann::json& out) {
    boost::beast::flat_buffer buf;
    boost::beast::error_code ec;
    ws_.read(buf, ec);
    if (ec) return false;
    out = nlohmann::json::parse(boost::beast::buffers_to_string(buf.data()));
    return true;
  }

  std::vector<nlohmann::json> drain() {
    std::vector<nlohmann::json> out;
    nlohmann::json j;
    while (next(j)) out.push_back(j);
    return out;
  }

  int close_code() const { return ws_.reason().code; }

 private:
  boost::asio::io_context io_;
  boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
};

}  // namespace gomoku::testing
