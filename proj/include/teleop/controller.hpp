#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "teleop/joints.hpp"

namespace teleop {

struct ControllerConfig {
  double control_rate = 100.0;   // Hz
  double smoothing_alpha = 0.35;  // exponential smoothing weight in (0, 1]
  JointLimits limits;
  bool hold_on_indeterminate = true;

  void validate() const;
};

struct ControllerState {
  JointVector last_command;
  double last_time = 0.0;
};

struct ControllerOutput {
  ControllerState state;
  JointVector command;
};

/// One control tick: hold indeterminate joints, smooth toward the target, limit the step
/// to max_velocity * dt, then clamp to the position limits. Equal timestamps use
/// dt = 1 / control_rate. Throws NonMonotonicTime when `now` precedes the state.
ControllerOutput controller_step(const ControllerState& state, const JointVector& target,
                                 double now, const ControllerConfig& cfg);

struct TimedCommand {
  double t = 0.0;
  JointVector joints;
};

/// Runs the controller on a fixed tick grid t0 + k / control_rate covering the input span,
/// each tick stepping toward the latest input at or before it. Without an explicit initial
/// state the controller starts at the first input (clamped) at t0.
std::vector<TimedCommand> resample_commands(const std::vector<TimedCommand>& input,
                                            const ControllerConfig& cfg,
                                            std::optional<ControllerState> initial = std::nullopt);

}  // namespace teleop
