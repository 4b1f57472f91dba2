#pragma once

// Scripted operator: searches human arm parameters that satisfy each goal and streams a
// minimum-jerk motion through them.

#include <cstdint>
#include <optional>
#include <vector>

#include "teleop/capture.hpp"
#include "teleop/kinematics.hpp"
#include "teleop/retarget.hpp"
#include "teleop/task.hpp"

namespace teleop {

struct OperatorModels {
  HumanArmModel human;
  KinematicChain chain;
  RetargetConfig retarget;
  JointLimits limits;
};

struct OperatorConfig {
  double capture_rate = 120.0;   // Hz
  double goal_duration = 1.5;    // s, minimum per goal
  double dwell = 0.5;            // s, held at each goal
  std::size_t max_evaluations = 5000;
  std::size_t random_starts = 6;
  std::uint64_t seed = 1;
  /// Goals are searched with tolerances scaled by this factor.
  double tolerance_margin = 0.8;
  /// Motions are stretched so no joint exceeds this fraction of its velocity limit.
  double velocity_fraction = 0.8;

  void validate() const;
};

struct GoalSearch {
  HumanParams params{};
  std::size_t evaluations = 0;
};

struct ScriptedRun {
  std::vector<FrameRecord> frames;
  HumanParams start_params{};
  std::vector<HumanParams> goal_params;
  /// Index into `frames` of the first frame of each goal's motion.
  std::vector<std::size_t> goal_first_frame;
};

/// Robot markers for a set of human parameters: human FK, retarget, calibrate, robot FK.
Observation pipeline_observation(const OperatorModels& models, const HumanParams& params);

/// Box of human parameters that stays clear of the retargeting singularities and maps
/// inside the robot limits after calibration.
struct ParamBounds {
  HumanParams lower{};
  HumanParams upper{};
};
ParamBounds operator_bounds(const OperatorModels& models);

/// Multi-start coordinate descent for one goal. Throws Unreachable(goal.index).
GoalSearch search_goal(const TaskPlan& plan, const Goal& goal, const OperatorModels& models,
                       const HumanParams& current, const OperatorConfig& cfg,
                       std::uint64_t seed);

/// Frames for the whole plan, starting at t = 0 from `start_posture`.
ScriptedRun scripted_operator(const TaskPlan& plan, const OperatorModels& models,
                              const JointVector& start_posture, const OperatorConfig& cfg = {});

}  // namespace teleop
