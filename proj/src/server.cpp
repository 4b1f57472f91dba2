#include "teleop/server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "teleop/errors.hpp"
#include "teleop/recording.hpp"
#include "teleop/session.hpp"

namespace teleop {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  virtual ~Connection() = default;
  /// `msg` is one message without a terminator.
  virtual void send(std::string msg) = 0;

  ClientId id = 0;
  std::string session;
};

/// Bounded outbound queue shared by both transports; the oldest unsent message is dropped
/// when a slow client falls behind.
class OutQueue {
 public:
  explicit OutQueue(std::size_t cap) : cap_(cap) {}

  /// Returns true when a message was dropped.
  bool push(std::string msg, bool writing) {
    bool dropped = false;
    if (q_.size() >= cap_) {
      // The front message may be in flight.
      if (writing && q_.size() > 1) {
        q_.erase(q_.begin() + 1);
        dropped = true;
      } else if (!writing) {
        q_.pop_front();
        dropped = true;
      }
    }
    q_.push_back(std::move(msg));
    return dropped;
  }
  std::string& front() { return q_.front(); }
  void pop() { q_.pop_front(); }
  bool empty() const { return q_.empty(); }

 private:
  std::size_t cap_;
  std::deque<std::string> q_;
};

const char* mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

}  // namespace

struct Server::Impl {
  struct Entry {
    std::unique_ptr<Session> session;
    std::map<ClientId, std::weak_ptr<Connection>> conns;
  };

  explicit Impl(const TeleopConfig& c) : cfg(c) {}

  TeleopConfig cfg;
  asio::io_context ioc;
  tcp::acceptor tcp_acc{ioc};
  tcp::acceptor ws_acc{ioc};
  asio::steady_timer timer{ioc};
  std::optional<asio::signal_set> signals;
  std::chrono::steady_clock::time_point start;
  std::uint64_t timer_ticks = 0;
  std::map<std::string, Entry> sessions;
  ClientId next_id = 1;
  std::ostream* record_sink = nullptr;
  std::unique_ptr<Recorder> recorder;

  std::atomic<std::uint64_t> n_messages{0};
  std::atomic<std::uint64_t> n_frames{0};
  std::atomic<std::uint64_t> n_ticks{0};
  std::atomic<std::uint64_t> n_dropped{0};

  double now() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  Entry& entry(const std::string& name) {
    auto it = sessions.find(name);
    if (it == sessions.end()) {
      Entry e;
      e.session = std::make_unique<Session>(cfg, sessions.empty() ? 0.0 : now());
      it = sessions.emplace(name, std::move(e)).first;
    }
    return it->second;
  }

  void attach(const std::shared_ptr<Connection>& c) {
    c->id = next_id++;
    c->session = cfg.service.default_session;
    Entry& e = entry(c->session);
    e.conns[c->id] = c;
    e.session->connect(c->id);
  }

  void detach(const std::shared_ptr<Connection>& c) {
    const auto it = sessions.find(c->session);
    if (it == sessions.end()) return;
    it->second.conns.erase(c->id);
    it->second.session->disconnect(c->id);
  }

  void dispatch(Entry& e, const std::vector<Outgoing>& outs) {
    for (const Outgoing& o : outs) {
      std::string text = o.msg.dump();
      if (o.to) {
        const auto it = e.conns.find(*o.to);
        if (it == e.conns.end()) continue;
        if (auto c = it->second.lock()) c->send(std::move(text));
        continue;
      }
      const auto topic = topic_of(o.msg);
      if (!topic) continue;
      for (const auto& [id, weak] : e.conns)
        if (e.session->wants(id, *topic))
          if (auto c = weak.lock()) c->send(text);
    }
  }

  void on_message(const std::shared_ptr<Connection>& c, std::string_view text) {
    ++n_messages;
    const json j = json::parse(text, nullptr, false);
    if (j.is_object()) {
      const std::string type = j.value("type", "");
      if (type == "frame") ++n_frames;
      // A subscribe naming another session moves the connection there first.
      if (type == "subscribe" && j.contains("session") && j["session"].is_string()) {
        const std::string name = j["session"].get<std::string>();
        if (!name.empty() && name != c->session) {
          detach(c);
          c->session = name;
          Entry& e = entry(name);
          e.conns[c->id] = c;
          e.session->connect(c->id);
        }
      }
    }
    Entry& e = entry(c->session);
    dispatch(e, e.session->receive(text, now(), c->id));
  }

  void schedule_tick() {
    ++timer_ticks;
    const double period_ns = 1e9 / cfg.controller.control_rate;
    timer.expires_at(start + std::chrono::nanoseconds(
                                 static_cast<std::int64_t>(static_cast<double>(timer_ticks) * period_ns)));
    timer.async_wait([this](const boost::system::error_code& ec) {
      if (ec) return;
      const double t = now();
      for (auto& [name, e] : sessions) dispatch(e, e.session->advance_through(t));
      n_ticks = sessions.at(cfg.service.default_session).session->ticks_run();
      schedule_tick();
    });
  }

  void accept_tcp();
  void accept_ws();
  void bind_acceptor(tcp::acceptor& acc, std::uint16_t port);
};

namespace {

class TcpConnection : public Connection {
 public:
  TcpConnection(tcp::socket s, Server::Impl& srv)
      : sock_(std::move(s)), buf_(kMaxLine), out_(srv.cfg.service.max_outbound), srv_(srv) {}

  void start() {
    srv_.attach(shared_from_this());
    read();
  }

  void send(std::string msg) override {
    msg += '\n';
    if (out_.push(std::move(msg), writing_)) ++srv_.n_dropped;
    if (!writing_) write();
  }

 private:
  std::shared_ptr<TcpConnection> self() {
    return std::static_pointer_cast<TcpConnection>(shared_from_this());
  }

  void read() {
    asio::async_read_until(sock_, buf_, '\n',
                           [self = self()](const boost::system::error_code& ec, std::size_t n) {
                             if (ec) {
                               self->srv_.detach(self);
                               return;
                             }
                             std::string line(asio::buffers_begin(self->buf_.data()),
                                              asio::buffers_begin(self->buf_.data()) + n - 1);
                             self->buf_.consume(n);
                             if (!line.empty() && line.back() == '\r') line.pop_back();
                             if (!line.empty()) self->srv_.on_message(self, line);
                             self->read();
                           });
  }

  void write() {
    writing_ = true;
    asio::async_write(sock_, asio::buffer(out_.front()),
                      [self = self()](const boost::system::error_code& ec, std::size_t) {
                        self->out_.pop();
                        if (ec) {
                          self->writing_ = false;
                          boost::system::error_code ignored;
                          self->sock_.close(ignored);
                          return;
                        }
                        if (self->out_.empty()) {
                          self->writing_ = false;
                        } else {
                          self->write();
                        }
                      });
  }

  tcp::socket sock_;
  asio::streambuf buf_;
  OutQueue out_;
  bool writing_ = false;
  Server::Impl& srv_;
};

class WsConnection : public Connection {
 public:
  WsConnection(tcp::socket s, Server::Impl& srv)
      : ws_(std::move(s)), out_(srv.cfg.service.max_outbound), srv_(srv) {}

  void accept(http::request<http::string_body> req) {
    ws_.read_message_max(kMaxLine);
    ws_.text(true);
    ws_.async_accept(req, [self = self()](const boost::system::error_code& ec) {
      if (ec) return;
      self->srv_.attach(self);
      self->read();
    });
  }

  void send(std::string msg) override {
    if (out_.push(std::move(msg), writing_)) ++srv_.n_dropped;
    if (!writing_) write();
  }

 private:
  std::shared_ptr<WsConnection> self() {
    return std::static_pointer_cast<WsConnection>(shared_from_this());
  }

  void read() {
    ws_.async_read(buf_, [self = self()](const boost::system::error_code& ec, std::size_t) {
      if (ec) {
        self->srv_.detach(self);
        return;
      }
      const std::string text = beast::buffers_to_string(self->buf_.data());
      self->buf_.consume(self->buf_.size());
      self->srv_.on_message(self, text);
      self->read();
    });
  }

  void write() {
    writing_ = true;
    ws_.async_write(asio::buffer(out_.front()),
                    [self = self()](const boost::system::error_code& ec, std::size_t) {
                      self->out_.pop();
                      if (ec) {
                        self->writing_ = false;
                        return;
                      }
                      if (self->out_.empty()) {
                        self->writing_ = false;
                      } else {
                        self->write();
                      }
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buf_;
  OutQueue out_;
  bool writing_ = false;
  Server::Impl& srv_;
};

/// Plain HTTP on the WebSocket port: static files, or an upgrade to a WsConnection.
class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket s, Server::Impl& srv) : stream_(std::move(s)), srv_(srv) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buf_, req_,
                     [self = shared_from_this()](const boost::system::error_code& ec, std::size_t) {
                       self->on_read(ec);
                     });
  }

  void on_read(const boost::system::error_code& ec) {
    if (ec) {
      boost::system::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<WsConnection>(stream_.release_socket(), srv_)->accept(std::move(req_));
      return;
    }
    respond();
  }

  template <class Body>
  void finish(http::response<Body>&& res) {
    auto sp = std::make_shared<http::response<Body>>(std::move(res));
    http::async_write(stream_, *sp,
                      [self = shared_from_this(), sp](const boost::system::error_code& ec, std::size_t) {
                        if (ec || !sp->keep_alive()) {
                          boost::system::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                          return;
                        }
                        self->read();
                      });
  }

  void error(http::status status, std::string_view detail) {
    http::response<http::string_body> res{status, req_.version()};
    res.set(http::field::content_type, "text/plain");
    res.keep_alive(req_.keep_alive());
    res.body() = std::string(detail) + "\n";
    res.prepare_payload();
    finish(std::move(res));
  }

  void respond() {
    if (req_.method() != http::verb::get && req_.method() != http::verb::head)
      return error(http::status::method_not_allowed, "method not allowed");
    std::string target(req_.target());
    if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target.empty() || target[0] != '/' || target.find("..") != std::string::npos)
      return error(http::status::bad_request, "bad path");
    if (target.back() == '/') target += "index.html";

    const std::filesystem::path path = std::filesystem::path(srv_.cfg.service.static_dir) / target.substr(1);
    beast::error_code ec;
    http::file_body::value_type body;
    body.open(path.string().c_str(), beast::file_mode::scan, ec);
    if (ec) return error(http::status::not_found, "not found");

    const auto size = body.size();
    if (req_.method() == http::verb::head) {
      http::response<http::empty_body> res{http::status::ok, req_.version()};
      res.set(http::field::content_type, mime_type(path));
      res.content_length(size);
      res.keep_alive(req_.keep_alive());
      return finish(std::move(res));
    }
    http::response<http::file_body> res{std::piecewise_construct, std::make_tuple(std::move(body)),
                                        std::make_tuple(http::status::ok, req_.version())};
    res.set(http::field::content_type, mime_type(path));
    res.content_length(size);
    res.keep_alive(req_.keep_alive());
    finish(std::move(res));
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buf_;
  http::request<http::string_body> req_;
  Server::Impl& srv_;
};

}  // namespace

void Server::Impl::bind_acceptor(tcp::acceptor& acc, std::uint16_t port) {
  try {
    const tcp::endpoint ep(asio::ip::make_address(cfg.service.host), port);
    acc.open(ep.protocol());
    acc.set_option(asio::socket_base::reuse_address(true));
    acc.bind(ep);
    acc.listen();
  } catch (const boost::system::system_error& e) {
    throw PortUnavailable("cannot listen on " + cfg.service.host + ":" + std::to_string(port) +
                          ": " + e.code().message());
  }
}

void Server::Impl::accept_tcp() {
  tcp_acc.async_accept([this](const boost::system::error_code& ec, tcp::socket s) {
    if (ec) return;
    s.set_option(tcp::no_delay(true));
    std::make_shared<TcpConnection>(std::move(s), *this)->start();
    accept_tcp();
  });
}

void Server::Impl::accept_ws() {
  ws_acc.async_accept([this](const boost::system::error_code& ec, tcp::socket s) {
    if (ec) return;
    s.set_option(tcp::no_delay(true));
    std::make_shared<HttpSession>(std::move(s), *this)->run();
    accept_ws();
  });
}

Server::Server(const TeleopConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {
  impl_->cfg.controller.limits = impl_->cfg.limits;
  impl_->cfg.validate();
}

Server::~Server() = default;

void Server::bind() {
  impl_->bind_acceptor(impl_->tcp_acc, impl_->cfg.service.port);
  impl_->bind_acceptor(impl_->ws_acc, impl_->cfg.service.ws_port);
}

std::uint16_t Server::port() const { return impl_->tcp_acc.local_endpoint().port(); }
std::uint16_t Server::ws_port() const { return impl_->ws_acc.local_endpoint().port(); }

void Server::record_to(std::ostream* sink) { impl_->record_sink = sink; }

void Server::run() {
  Impl& m = *impl_;
  if (!m.tcp_acc.is_open()) bind();
  m.start = std::chrono::steady_clock::now();
  Impl::Entry& def = m.entry(m.cfg.service.default_session);
  if (m.record_sink) {
    m.recorder = std::make_unique<Recorder>(m.record_sink);
    def.session->set_recorder(m.recorder.get());
  }
  m.accept_tcp();
  m.accept_ws();
  m.schedule_tick();
  m.ioc.run();
}

void Server::stop() { impl_->ioc.stop(); }

void Server::stop_on_signals() {
  impl_->signals.emplace(impl_->ioc, SIGINT, SIGTERM);
  impl_->signals->async_wait([this](const boost::system::error_code& ec, int) {
    if (!ec) impl_->ioc.stop();
  });
}

ServerStats Server::stats() const {
  return {impl_->n_messages.load(), impl_->n_frames.load(), impl_->n_ticks.load(),
          impl_->n_dropped.load()};
}

}  // namespace teleop
