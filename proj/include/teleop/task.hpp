#pragma once

// Evaluation tasks: reaching a ring of targets with the end-effector, and matching
// elbow/wrist postures. Both present goals one at a time; a goal's movement time runs
// from its appearance to the first observation that satisfies it.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "teleop/geometry.hpp"
#include "teleop/joints.hpp"
#include "teleop/json_io.hpp"
#include "teleop/kinematics.hpp"

namespace teleop {

enum class TaskKind { Ring, Posture };
std::string_view to_string(TaskKind k);
std::optional<TaskKind> parse_task_kind(std::string_view s);

/// Reaching task: `count` discs of diameter `target_diameter` on a circle of `radius`
/// around `center`, in the plane through `center` with unit normal `normal`.
struct RingTaskSpec {
  Vec3 center{0.0, 0.56, 0.9};
  double radius = 0.225;
  double target_diameter = 0.05;
  std::size_t count = 11;
  double perpendicular_tolerance = 0.10;
  Vec3 normal{0.0, 0.0, 1.0};
  /// Also require the in-plane offset to lie within the disc (target_diameter / 2).
  bool require_in_plane = true;

  void validate() const;
};

struct PostureGoal {
  std::string label;
  JointVector joints;
};

struct PostureTaskSpec {
  std::vector<PostureGoal> postures;
  double tolerance = 0.05;
  JointVector start_posture;
  /// Presentation order (indices into `postures`); empty means 0..n-1.
  std::vector<std::size_t> order;

  void validate(const JointLimits& limits) const;
};

/// Four postures: elbow up/down x wrist up/down, starting from a straight arm.
PostureTaskSpec default_posture_spec();

std::vector<Vec3> ring_target_positions(const RingTaskSpec& spec);

struct RingSequence {
  std::vector<std::size_t> order;
  std::size_t stride = 1;
  /// Set when the natural stride shared a factor with the count and was moved to the
  /// nearest coprime value.
  bool stride_adjusted = false;
};

/// Multidirectional tapping order: index_k = k * stride mod count, stride = ceil(count / 2).
RingSequence ring_sequence(std::size_t count);

bool selection_test(const Vec3& ee, const Vec3& target, const RingTaskSpec& spec);
bool posture_match_test(const Vec3& elbow, const Vec3& wrist, const Vec3& goal_elbow,
                        const Vec3& goal_wrist, double tol);

/// One goal in presentation order.
struct Goal {
  std::size_t index = 0;  // ring target index or posture index
  std::string label;
  Vec3 target;            // ring
  Vec3 elbow;             // posture
  Vec3 wrist;             // posture
  std::optional<JointVector> joints;  // posture: the robot configuration that defines it
};

/// A task with its goals resolved to task-frame positions.
struct TaskPlan {
  TaskKind kind = TaskKind::Ring;
  RingTaskSpec ring;
  double posture_tolerance = 0.05;
  std::vector<Goal> goals;
};

TaskPlan make_ring_plan(const RingTaskSpec& spec);
TaskPlan make_posture_plan(const PostureTaskSpec& spec, const KinematicChain& chain);

/// Robot marker positions the predicates look at.
struct Observation {
  Vec3 ee;
  Vec3 elbow;
  Vec3 wrist;
};

Observation observe(const KinematicChain& chain, const JointVector& joints);
bool goal_satisfied(const TaskPlan& plan, const Goal& goal, const Observation& obs);

enum class TaskStatus { Idle, Running, Done };
std::string_view to_string(TaskStatus s);

enum class EventKind { GoalShown, GoalAchieved, Clamp };
std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct TaskEvent {
  double t = 0.0;
  EventKind kind = EventKind::GoalShown;
  std::size_t goal_index = 0;
  json payload = json::object();

  bool operator==(const TaskEvent&) const = default;
};

struct TaskState {
  TaskKind kind = TaskKind::Ring;
  TaskStatus status = TaskStatus::Idle;
  std::size_t active_index = 0;  // position in the plan's goal list
  std::vector<std::optional<double>> shown_at;
  std::vector<std::optional<double>> achieved_at;
};

struct TaskStep {
  TaskState state;
  std::vector<TaskEvent> events;
};

/// Shows the first goal at `now`.
TaskStep start_task(const TaskPlan& plan, double now);

/// Advances at most one goal per observation. Idle and finished states are returned as is.
TaskStep task_advance(const TaskState& state, const TaskPlan& plan, const Observation& obs,
                      double now);

/// n x n Latin square. Row 0 is 0, 1, n-1, 2, n-2, ...; row r adds r mod n, which for even
/// n also balances first-order carry-over.
std::vector<std::vector<std::size_t>> latin_square(std::size_t n);

struct TrialLog {
  std::vector<TaskEvent> events;
};

/// One JSON object per line: {"t", "event", "goal_index", "payload"}.
std::string serialize_trial_log(const TrialLog& log);
/// Throws ParseError with the offending line.
TrialLog parse_trial_log(std::string_view text);

struct MovementTime {
  std::size_t goal_index = 0;
  double shown_at = 0.0;
  double achieved_at = 0.0;
  double movement_time = 0.0;

  bool operator==(const MovementTime&) const = default;
};

struct MetricsSummary {
  std::vector<MovementTime> movement_times;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single goal
  std::size_t clamp_events = 0;

  bool operator==(const MetricsSummary&) const = default;
};

/// Throws IncompleteTrial when the log has no goals or a shown goal was never achieved.
MetricsSummary summarize(const TrialLog& log);
json metrics_to_json(const MetricsSummary& m);

}  // namespace teleop
