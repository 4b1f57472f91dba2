#pragma once

// Headless experiment: the scripted operator drives a session through a whole task.

#include <cstdint>
#include <optional>

#include "teleop/config.hpp"
#include "teleop/operator.hpp"
#include "teleop/recording.hpp"
#include "teleop/task.hpp"

namespace teleop {

struct SimulationOptions {
  TaskKind task = TaskKind::Ring;
  std::uint64_t seed = 1;
  /// Posture task: presentation order from this row of the Latin square.
  std::optional<std::size_t> participant;
  /// Extra time allowed after the last frame for the robot to settle.
  double settle_time = 5.0;
};

struct SimulationResult {
  ScriptedRun run;
  TrialLog log;
  bool completed = false;
  double end_time = 0.0;
};

/// Posture spec with the participant's counterbalanced order applied.
PostureTaskSpec posture_spec_for(const TeleopConfig& cfg, std::optional<std::size_t> participant);

/// Throws Unreachable when the operator cannot find a goal pose. `rec`, when given, records
/// the session.
SimulationResult simulate_task(const TeleopConfig& cfg, const SimulationOptions& opts,
                               Recorder* rec = nullptr);

}  // namespace teleop
