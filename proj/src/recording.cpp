#include "teleop/recording.hpp"

#include <chrono>
#include <ostream>
#include <thread>

#include "teleop/errors.hpp"

namespace teleop {

void Recorder::line(const json& j) {
  std::string s = j.dump();
  s += '\n';
  if (sink_) {
    *sink_ << s;
  } else {
    text_ += s;
  }
}

void Recorder::begin(double t0) { line({{"recording", 1}, {"t0", t0}}); }

void Recorder::input(std::string_view text, double t, ClientId from) {
  line({{"t", t}, {"client", from}, {"in", std::string(text)}});
}

void Recorder::advance(double t) { line({{"tick", t}}); }

void Recorder::output(const json& msg, std::optional<ClientId> to) {
  json j = {{"out", msg}};
  if (to) j["to"] = *to;
  line(j);
}

ReplayResult replay_recording(std::string_view recording, const TeleopConfig& cfg, double pace) {
  ReplayResult result;
  std::optional<Session> session;
  Recorder rec;

  const auto start = std::chrono::steady_clock::now();
  const auto wait_until = [&](double t) {
    if (pace <= 0.0) return;
    std::this_thread::sleep_until(start + std::chrono::duration<double>(t / pace));
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < recording.size()) {
    std::size_t nl = recording.find('\n', pos);
    if (nl == std::string_view::npos) nl = recording.size();
    const std::string_view text = recording.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (text.empty()) continue;

    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError(line_no, 0, "not a JSON object");
    try {
      if (j.contains("recording")) {
        if (session) throw ParseError(line_no, 0, "second recording header");
        session.emplace(cfg, j.at("t0").get<double>());
        session->set_recorder(&rec);
        continue;
      }
      if (!session) throw ParseError(line_no, 0, "missing recording header");
      if (j.contains("in")) {
        const double t = j.at("t").get<double>();
        wait_until(t);
        session->receive(j.at("in").get<std::string>(), t, j.at("client").get<ClientId>());
        ++result.inputs;
      } else if (j.contains("tick")) {
        const double t = j.at("tick").get<double>();
        wait_until(t);
        session->advance_through(t);
      } else if (j.contains("out")) {
        ++result.outputs;
      } else {
        throw ParseError(line_no, 0, "unknown recording entry");
      }
    } catch (const json::exception& e) {
      throw ParseError(line_no, 0, std::string("malformed recording entry: ") + e.what());
    }
  }
  if (!session) throw ParseError(line_no, 0, "missing recording header");

  result.replayed = rec.text();
  result.identical = result.replayed == recording;
  if (!result.identical) {
    std::size_t a = 0, b = 0, n = 1;
    const std::string_view r = result.replayed;
    while (true) {
      const std::size_t ea = recording.find('\n', a);
      const std::size_t eb = r.find('\n', b);
      const std::string_view la = a < recording.size() ? recording.substr(a, ea - a) : std::string_view{};
      const std::string_view lb = b < r.size() ? r.substr(b, eb - b) : std::string_view{};
      if (la != lb || ea == std::string_view::npos || eb == std::string_view::npos) break;
      a = ea + 1;
      b = eb + 1;
      ++n;
    }
    result.first_mismatch_line = n;
  }
  return result;
}

}  // namespace teleop
