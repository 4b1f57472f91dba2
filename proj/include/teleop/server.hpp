#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>

#include "teleop/config.hpp"

namespace teleop {

struct ServerStats {
  std::uint64_t messages = 0;
  std::uint64_t frames = 0;
  std::uint64_t ticks = 0;
  std::uint64_t dropped_outbound = 0;
};

/// Network front end for sessions: newline-delimited JSON on `service.port`, WebSocket and
/// static files from `service.static_dir` on `service.ws_port`. All sessions, sockets and
/// the tick timer share one io thread.
class Server {
 public:
  explicit Server(const TeleopConfig& cfg);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Opens the listeners. Port 0 picks a free port. Throws PortUnavailable.
  void bind();
  std::uint16_t port() const;
  std::uint16_t ws_port() const;

  /// Records the default session to `sink` (set before run()).
  void record_to(std::ostream* sink);

  /// Serves until stop(). Time starts at 0 when run() is entered.
  void run();
  /// Safe from any thread.
  void stop();
  /// Make SIGINT and SIGTERM stop the server (call before run()).
  void stop_on_signals();

  /// Snapshot; safe from any thread.
  ServerStats stats() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace teleop
