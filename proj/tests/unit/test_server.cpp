#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "teleop/errors.hpp"
#include "teleop/json_io.hpp"
#include "teleop/server.hpp"

using namespace teleop;
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
using tcp = asio::ip::tcp;

namespace {

struct RunningServer {
  std::filesystem::path web;
  std::unique_ptr<Server> server;
  std::thread thread;

  RunningServer() {
    web = std::filesystem::temp_directory_path() / "teleop_server_test_web";
    std::filesystem::create_directories(web);
    std::ofstream(web / "index.html") << "<html>cockpit</html>";
    TeleopConfig cfg;
    cfg.service.port = 0;
    cfg.service.ws_port = 0;
    cfg.service.static_dir = web.string();
    server = std::make_unique<Server>(cfg);
    server->bind();
    thread = std::thread([this] { server->run(); });
  }
  ~RunningServer() {
    server->stop();
    thread.join();
    std::filesystem::remove_all(web);
  }
};

// Reads newline-delimited messages until one of `type` arrives.
json read_until(tcp::socket& sock, asio::streambuf& buf, std::string_view type) {
  for (int i = 0; i < 2000; ++i) {
    asio::read_until(sock, buf, '\n');
    std::istream in(&buf);
    std::string line;
    std::getline(in, line);
    json j = json::parse(line);
    if (j["type"] == type) return j;
  }
  return {};
}

http::response<http::string_body> get(std::uint16_t port, const std::string& target) {
  asio::io_context io;
  tcp::socket sock(io);
  sock.connect({asio::ip::make_address("127.0.0.1"), port});
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "localhost");
  http::write(sock, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(sock, buf, res);
  return res;
}

}  // namespace

TEST_CASE("tcp clients exchange newline-delimited json") {
  RunningServer rs;
  asio::io_context io;
  tcp::socket sock(io);
  sock.connect({asio::ip::make_address("127.0.0.1"), rs.server->port()});
  asio::streambuf buf;

  asio::write(sock, asio::buffer(std::string(R"({"type":"subscribe","topics":["task"],"seq":1})") + "\n"));
  const json ack = read_until(sock, buf, "ack");
  CHECK(ack["ref"] == 1);
  CHECK(read_until(sock, buf, "task_state")["status"] == "idle");

  asio::write(sock, asio::buffer(std::string(R"({"type":"start_task","kind":"ring"})") + "\n"));
  const json state = read_until(sock, buf, "task_state");
  CHECK(state["status"] == "running");

  asio::write(sock, asio::buffer(std::string("oops\n")));
  CHECK(read_until(sock, buf, "error")["code"] == "bad_message");
  CHECK(rs.server->stats().messages >= 3);
}

TEST_CASE("websocket clients share the default session") {
  RunningServer rs;
  asio::io_context io;
  tcp::socket raw(io);
  raw.connect({asio::ip::make_address("127.0.0.1"), rs.server->ws_port()});
  beast::websocket::stream<tcp::socket> ws(std::move(raw));
  ws.handshake("localhost", "/ws");
  ws.write(asio::buffer(std::string(R"({"type":"set_condition","value":"RH","seq":5})")));
  bool acked = false;
  for (int i = 0; i < 500 && !acked; ++i) {
    beast::flat_buffer b;
    ws.read(b);
    const json j = json::parse(beast::buffers_to_string(b.data()));
    if (j["type"] == "ack") {
      CHECK(j["ref"] == 5);
      acked = true;
    }
  }
  CHECK(acked);
  ws.close(beast::websocket::close_code::normal);
}

TEST_CASE("static files and errors over http") {
  RunningServer rs;
  auto res = get(rs.server->ws_port(), "/");
  CHECK(res.result() == http::status::ok);
  CHECK(res.body() == "<html>cockpit</html>");
  CHECK(res[http::field::content_type].starts_with("text/html"));
  CHECK(get(rs.server->ws_port(), "/index.html").result() == http::status::ok);
  CHECK(get(rs.server->ws_port(), "/missing.js").result() == http::status::not_found);
  CHECK(get(rs.server->ws_port(), "/../etc/passwd").result() != http::status::ok);
}

TEST_CASE("busy port is reported") {
  asio::io_context io;
  tcp::acceptor blocker(io, {asio::ip::make_address("127.0.0.1"), 0});
  TeleopConfig cfg;
  cfg.service.port = blocker.local_endpoint().port();
  cfg.service.ws_port = 0;
  Server s(cfg);
  CHECK_THROWS_AS(s.bind(), PortUnavailable);
}
