#include "teleop/cli.hpp"

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "teleop/capture.hpp"
#include "teleop/config.hpp"
#include "teleop/errors.hpp"
#include "teleop/recording.hpp"
#include "teleop/server.hpp"
#include "teleop/session.hpp"
#include "teleop/simulate.hpp"

namespace teleop {

namespace {

namespace fs = std::filesystem;

/// Missing or unreadable input file (exit 2).
class InputError : public TeleopError {
 public:
  using TeleopError::TeleopError;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read input file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a temporary file next to `path`, then renames it into place.
void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InputError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InputError("cannot write " + path);
  }
}

TeleopConfig config_from(const std::string& path) {
  return load_config_with_env(path.empty() ? std::nullopt : std::optional<fs::path>(path));
}

double parse_rate(const std::string& s) {
  std::string v = s;
  if (!v.empty() && (v.front() == 'x' || v.front() == 'X')) v.erase(0, 1);
  std::size_t used = 0;
  double r = 0.0;
  try {
    r = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || !(r >= 0.0)) throw InputError("bad --rate '" + s + "' (expected xN)");
  return r;
}

struct RetargetArgs {
  std::string input, format, config, output;
  bool lenient = false;
};

int cmd_retarget(const RetargetArgs& a, std::ostream& out, std::ostream& err) {
  const TeleopConfig cfg = config_from(a.config);
  FrameFormat format = frame_format_for_path(a.input);
  if (!a.format.empty()) {
    const auto f = parse_frame_format(a.format);
    if (!f) throw InputError("unknown format '" + a.format + "'");
    format = *f;
  }
  const ParsedFrames parsed = parse_frames(read_file(a.input), format, {!a.lenient});
  for (std::size_t line : parsed.dropped_lines)
    err << "warning: " << a.input << ":" << line << ": out-of-order record dropped\n";

  const bool as_jsonl = a.output.size() >= 6 && a.output.substr(a.output.size() - 6) == ".jsonl";
  std::string text;
  if (!as_jsonl) {
    text = "t";
    for (std::size_t i = 1; i <= kDof; ++i) text += ",theta" + std::to_string(i);
    for (std::size_t i = 1; i <= kDof; ++i) text += ",flag" + std::to_string(i);
    text += '\n';
  }
  std::size_t rows = 0;
  for (std::size_t k = 0; k < parsed.frames.size(); ++k) {
    const FrameRecord& f = parsed.frames[k];
    JointVector cmd;
    try {
      cmd = calibrate_joints(retarget_frame(f, cfg.retarget), cfg.retarget, cfg.limits);
    } catch (const DegenerateSegment& e) {
      err << "warning: " << a.input << ": record " << k + 1 << " skipped: " << e.what() << "\n";
      continue;
    }
    if (as_jsonl) {
      text += json{{"t", f.timestamp}, {"theta", cmd.theta}, {"flags", flags_to_json(cmd.flags)}}.dump();
    } else {
      text += format_double(f.timestamp);
      for (double v : cmd.theta) text += "," + format_double(v);
      for (JointFlag fl : cmd.flags) text += "," + std::string(to_string(fl));
    }
    text += '\n';
    ++rows;
  }
  if (a.output.empty() || a.output == "-") {
    out << text;
  } else {
    write_file_atomic(a.output, text);
  }
  err << "retargeted " << rows << " of " << parsed.frames.size() << " frames\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string task = "ring", op = "scripted", out, log, record, config;
  std::uint64_t seed = 1;
  std::optional<std::size_t> participant;
};

void print_table(const MetricsSummary& m, std::ostream& out) {
  out << std::left << std::setw(6) << "goal" << std::right << std::setw(12) << "shown [s]"
      << std::setw(12) << "done [s]" << std::setw(12) << "MT [s]" << "\n";
  out << std::fixed << std::setprecision(3);
  for (const auto& mt : m.movement_times)
    out << std::left << std::setw(6) << mt.goal_index << std::right << std::setw(12) << mt.shown_at
        << std::setw(12) << mt.achieved_at << std::setw(12) << mt.movement_time << "\n";
  out << "count " << m.movement_times.size() << "  mean " << m.mean << " s  sd " << m.sd
      << " s  clamp events " << m.clamp_events << "\n";
  out << std::defaultfloat << std::setprecision(6);
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const TeleopConfig cfg = config_from(a.config);
  SimulationOptions opts;
  const auto kind = parse_task_kind(a.task);
  if (!kind) throw InputError("unknown task '" + a.task + "'");
  if (a.op != "scripted") throw InputError("unknown operator '" + a.op + "'");
  opts.task = *kind;
  opts.seed = a.seed;
  opts.participant = a.participant;

  Recorder rec;
  const SimulationResult r = simulate_task(cfg, opts, a.record.empty() ? nullptr : &rec);
  const std::string log_text = serialize_trial_log(r.log);
  if (!a.log.empty()) write_file_atomic(a.log, log_text);
  if (!a.record.empty()) write_file_atomic(a.record, rec.text());
  if (!r.completed) {
    err << "task did not complete within " << r.end_time << " s\n";
    return kExitTask;
  }
  const MetricsSummary m = summarize(r.log);
  const std::string metrics = metrics_to_json(m).dump(2) + "\n";
  if (!a.out.empty()) write_file_atomic(a.out, metrics);
  print_table(m, out);
  return kExitOk;
}

struct ReplayArgs {
  std::string input, rate, config, out;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  const TeleopConfig cfg = config_from(a.config);
  const double pace = a.rate.empty() ? 0.0 : parse_rate(a.rate);
  const std::string text = read_file(a.input);

  // Decide by the first record: a session recording, a trial log, or a frames file.
  std::string first;
  {
    std::istringstream ss(text);
    while (std::getline(ss, first))
      if (first.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  const json head = json::parse(first, nullptr, false);
  const auto start = std::chrono::steady_clock::now();
  const auto wait_until = [&](double t) {
    if (pace > 0.0) std::this_thread::sleep_until(start + std::chrono::duration<double>(t / pace));
  };

  if (head.is_object() && head.contains("recording")) {
    const ReplayResult r = replay_recording(text, cfg, pace);
    if (!a.out.empty()) write_file_atomic(a.out, r.replayed);
    if (!r.identical) {
      err << "replay differs from the recording at line " << *r.first_mismatch_line << "\n";
      return kExitTask;
    }
    out << "replayed " << r.inputs << " inputs, " << r.outputs << " outputs: identical\n";
    return kExitOk;
  }

  std::string result;
  if (head.is_object() && head.contains("event")) {
    const TrialLog log = parse_trial_log(text);
    for (const auto& e : log.events) {
      wait_until(e.t);
      result += serialize_trial_log({{e}});
    }
  } else {
    const ParsedFrames parsed = parse_frames(text, frame_format_for_path(a.input));
    Session session(cfg);
    Recorder rec;
    session.set_recorder(&rec);
    std::int64_t seq = 0;
    for (const FrameRecord& f : parsed.frames) {
      wait_until(f.timestamp);
      session.receive(client_message_to_json({++seq, FrameMsg{f}}).dump(), f.timestamp, 1);
    }
    if (!parsed.frames.empty()) session.advance_through(parsed.frames.back().timestamp);
    result = rec.text();
  }
  if (a.out.empty() || a.out == "-") {
    out << result;
  } else {
    write_file_atomic(a.out, result);
  }
  return kExitOk;
}

struct ServeArgs {
  std::optional<int> port;
  std::optional<int> ws_port;
  std::string config, record, static_dir;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream&) {
  TeleopConfig cfg = config_from(a.config);
  if (a.port) cfg.service.port = static_cast<std::uint16_t>(*a.port);
  if (a.ws_port) cfg.service.ws_port = static_cast<std::uint16_t>(*a.ws_port);
  if (!a.static_dir.empty()) cfg.service.static_dir = a.static_dir;
  Server server(cfg);
  server.bind();
  std::ofstream rec;
  if (!a.record.empty()) {
    rec.open(a.record, std::ios::binary | std::ios::trunc);
    if (!rec) throw InputError("cannot write " + a.record);
    server.record_to(&rec);
  }
  server.stop_on_signals();
  out << "listening on " << cfg.service.host << ":" << server.port() << " (tcp), " << cfg.service.host
      << ":" << server.ws_port() << " (websocket/http)" << std::endl;
  server.run();
  return kExitOk;
}

struct MetricsArgs {
  std::string log, out;
  bool as_json = false;
};

int cmd_metrics(const MetricsArgs& a, std::ostream& out, std::ostream&) {
  const MetricsSummary m = summarize(parse_trial_log(read_file(a.log)));
  const std::string j = metrics_to_json(m).dump(2) + "\n";
  if (!a.out.empty()) write_file_atomic(a.out, j);
  if (a.as_json) {
    out << j;
  } else {
    print_table(m, out);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Human-to-robot arm teleoperation toolkit", "teleop"};
  app.require_subcommand(1);

  RetargetArgs ra;
  auto* retarget = app.add_subcommand("retarget", "Retarget a frames file to calibrated joint angles");
  retarget->add_option("--input,-i", ra.input, "Frames file (csv or jsonl)")->required();
  retarget->add_option("--format", ra.format, "csv or jsonl (default: from extension)");
  retarget->add_option("--config,-c", ra.config, "Config file");
  retarget->add_option("--output,-o", ra.output, "Output file (.csv or .jsonl; default stdout)");
  retarget->add_flag("--lenient", ra.lenient, "Drop out-of-order records instead of failing");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a task with the scripted operator");
  simulate->add_option("--task", sa.task, "ring or posture")->check(CLI::IsMember({"ring", "posture"}));
  simulate->add_option("--operator", sa.op, "Operator model")->check(CLI::IsMember({"scripted"}));
  simulate->add_option("--seed", sa.seed, "Search seed");
  simulate->add_option("--out", sa.out, "Metrics JSON output");
  simulate->add_option("--log", sa.log, "Trial log output (JSON lines)");
  simulate->add_option("--record", sa.record, "Session recording output");
  simulate->add_option("--participant", sa.participant, "Latin-square row for the posture order");
  simulate->add_option("--config,-c", sa.config, "Config file");

  ReplayArgs pa;
  auto* replay = app.add_subcommand("replay", "Replay a session recording, trial log or frames file");
  replay->add_option("--input,-i", pa.input, "Input file")->required();
  replay->add_option("--rate", pa.rate, "Pace as xN of real time (default: as fast as possible)");
  replay->add_option("--out,-o", pa.out, "Write the regenerated log here");
  replay->add_option("--config,-c", pa.config, "Config file");

  ServeArgs va;
  auto* serve = app.add_subcommand("serve", "Run the teleoperation service");
  serve->add_option("--port,-p", va.port, "TCP port (newline-delimited JSON)");
  serve->add_option("--ws-port", va.ws_port, "WebSocket / HTTP port");
  serve->add_option("--static", va.static_dir, "Directory served over HTTP");
  serve->add_option("--record", va.record, "Record the default session to this file");
  serve->add_option("--config,-c", va.config, "Config file");

  MetricsArgs ma;
  auto* metrics = app.add_subcommand("metrics", "Summarize a trial log");
  metrics->add_option("--log,-l", ma.log, "Trial log")->required();
  metrics->add_flag("--json", ma.as_json, "Print JSON instead of a table");
  metrics->add_option("--out,-o", ma.out, "Also write the JSON summary here");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (*retarget) return cmd_retarget(ra, out, err);
    if (*simulate) return cmd_simulate(sa, out, err);
    if (*replay) return cmd_replay(pa, out, err);
    if (*serve) return cmd_serve(va, out, err);
    if (*metrics) return cmd_metrics(ma, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Unreachable& e) {
    err << "task error: " << e.what() << "\n";
    return kExitTask;
  } catch (const IncompleteTrial& e) {
    err << "trial error: " << e.what() << "\n";
    return kExitTask;
  } catch (const PortUnavailable& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  }
  return kExitInput;
}

}  // namespace teleop
