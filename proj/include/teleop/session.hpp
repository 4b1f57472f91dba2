#pragma once

// One teleoperation session: a single writer that turns client messages and control ticks
// into server messages. Transport-free; time is passed in by the caller, so the same code
// runs on the wall clock (server) and on recorded timestamps (replay, simulation).

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "teleop/config.hpp"
#include "teleop/controller.hpp"
#include "teleop/protocol.hpp"
#include "teleop/task.hpp"

namespace teleop {

using ClientId = std::uint64_t;

struct Outgoing {
  json msg;
  /// Set for ack/error (sender only); otherwise broadcast on topic_of(msg).
  std::optional<ClientId> to;
};

class Recorder;

class Session {
 public:
  /// Ticks fall on t0 + k / control_rate.
  explicit Session(const TeleopConfig& cfg, double t0 = 0.0);

  /// New clients receive every topic until they subscribe.
  void connect(ClientId id);
  void disconnect(ClientId id);
  bool wants(ClientId id, Topic topic) const;
  std::vector<ClientId> clients() const;

  /// Runs the ticks due strictly before `now`, then handles one message from `from`.
  std::vector<Outgoing> receive(std::string_view text, double now, ClientId from);
  /// Runs every tick due at or before `now`.
  std::vector<Outgoing> advance_through(double now);

  double next_tick_time() const;
  std::uint64_t ticks_run() const { return next_tick_; }
  std::size_t buffered_frames() const { return pending_ ? 1 : 0; }
  const TaskState& task_state() const { return task_; }
  const TrialLog& trial_log() const { return log_; }
  const ControllerState& controller_state() const { return ctrl_; }
  Condition condition() const { return condition_; }
  const TeleopConfig& config() const { return cfg_; }

  /// Writes the recording header, then appends every input and output to `rec`
  /// (nullptr stops recording).
  void set_recorder(Recorder* rec);

 private:
  struct Pending {
    FrameRecord frame;
    ClientId from = 0;
  };

  std::vector<Outgoing> run_ticks(double now, bool inclusive);
  void tick(double t, std::vector<Outgoing>& out);
  void handle(const ClientMsg& msg, double now, ClientId from, std::vector<Outgoing>& out);
  void emit(std::vector<Outgoing>& out, json msg, std::optional<ClientId> to = std::nullopt);
  json task_state_msg(double now) const;
  json task_event_msg(const TaskEvent& e) const;
  void reset_controller(double now);

  TeleopConfig cfg_;
  double t0_;
  std::uint64_t next_tick_ = 0;
  ControllerState ctrl_;
  std::optional<JointVector> target_;
  std::optional<Pending> pending_;
  bool degenerate_burst_ = false;
  bool clamped_ = false;

  std::optional<TaskPlan> plan_;
  TaskState task_;
  TrialLog log_;
  Condition condition_ = Condition::None;

  std::map<ClientId, std::set<Topic>> subscriptions_;
  std::map<ClientId, std::uint64_t> ack_seq_;
  Recorder* recorder_ = nullptr;
};

}  // namespace teleop
