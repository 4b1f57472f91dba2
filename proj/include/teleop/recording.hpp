#pragma once

// Session recordings: JSON lines holding every input message, every clock advance and
// every output, in order. Replaying the inputs through a fresh session must regenerate the
// same text.
//
//   {"recording":1,"t0":0}
//   {"t":0.5,"client":1,"in":"<raw message text>"}
//   {"tick":0.5}
//   {"out":{...},"to":1}        "to" only for ack/error

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "teleop/session.hpp"

namespace teleop {

class Recorder {
 public:
  /// Lines go to `sink` when given, otherwise they accumulate in text().
  explicit Recorder(std::ostream* sink = nullptr) : sink_(sink) {}

  void begin(double t0);
  void input(std::string_view text, double t, ClientId from);
  void advance(double t);
  void output(const json& msg, std::optional<ClientId> to);

  const std::string& text() const { return text_; }

 private:
  void line(const json& j);

  std::ostream* sink_;
  std::string text_;
};

struct ReplayResult {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  bool identical = false;
  std::optional<std::size_t> first_mismatch_line;  // 1-based
  std::string replayed;
};

/// Re-drives a fresh session from the inputs of `recording`. With pace > 0 the replay
/// sleeps so that message times elapse at pace x real time; pace only affects wall time.
/// Throws ParseError.
ReplayResult replay_recording(std::string_view recording, const TeleopConfig& cfg, double pace = 0.0);

}  // namespace teleop
