#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "teleop/errors.hpp"
#include "teleop/operator.hpp"

namespace teleop {

namespace {

// Distance kept from the elevation poles, the antiparallel swing and the robot limits.
constexpr double kSingularMargin = 0.05;
constexpr double kLimitMargin = 1e-3;
constexpr double kInitialStep = 0.2;
constexpr double kMinStep = 1e-5;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

HumanParams project(const HumanParams& p, const ParamBounds& b) {
  HumanParams out;
  for (std::size_t i = 0; i < kDof; ++i) out[i] = std::clamp(p[i], b.lower[i], b.upper[i]);
  return out;
}

struct Objective {
  const TaskPlan& plan;
  const Goal& goal;
  const OperatorModels& models;
  double margin;

  double value(const Observation& obs) const {
    if (plan.kind == TaskKind::Ring) {
      const Vec3 d = obs.ee - goal.target;
      const double perp = dot(d, plan.ring.normal);
      const double in_plane = norm(d - plan.ring.normal * perp);
      const double excess =
          std::max(0.0, std::abs(perp) - 0.75 * margin * plan.ring.perpendicular_tolerance);
      return in_plane * in_plane + excess * excess;
    }
    const Vec3 de = obs.elbow - goal.elbow;
    const Vec3 dw = obs.wrist - goal.wrist;
    return dot(de, de) + dot(dw, dw);
  }

  bool satisfied_with_margin(const Observation& obs) const {
    TaskPlan tight = plan;
    tight.ring.perpendicular_tolerance *= margin;
    tight.ring.target_diameter *= margin;
    tight.posture_tolerance *= margin;
    return goal_satisfied(tight, goal, obs);
  }
};

}  // namespace

void OperatorConfig::validate() const {
  if (!(capture_rate > 0.0)) throw ConfigError("operator.capture_rate must be positive");
  if (!(goal_duration > 0.0)) throw ConfigError("operator.goal_duration must be positive");
  if (!(dwell >= 0.0)) throw ConfigError("operator.dwell must be non-negative");
  if (max_evaluations == 0) throw ConfigError("operator.max_evaluations must be positive");
  if (!(tolerance_margin > 0.0 && tolerance_margin <= 1.0))
    throw ConfigError("operator.tolerance_margin must be in (0, 1]");
  if (!(velocity_fraction > 0.0 && velocity_fraction <= 1.0))
    throw ConfigError("operator.velocity_fraction must be in (0, 1]");
}

Observation pipeline_observation(const OperatorModels& models, const HumanParams& params) {
  const SkeletonFrame frame = human_arm_fk(models.human, params, models.retarget);
  const JointVector raw = retarget_frame(frame, models.retarget);
  const JointVector cmd = calibrate_joints(raw, models.retarget, models.limits);
  return observe(models.chain, cmd);
}

ParamBounds operator_bounds(const OperatorModels& models) {
  ParamBounds b;
  const double half = kPi / 2 - kSingularMargin;
  const double full = kPi - kSingularMargin;
  b.lower = {-half, -full, -full, kSingularMargin, -full, -full, -full};
  b.upper = {half, full, full, kPi, full, full, full};
  for (std::size_t i = 0; i < kDof; ++i) {
    const auto& c = models.retarget.calibration[i];
    const double lo = models.limits.lower[i] + kLimitMargin;
    const double hi = models.limits.upper[i] - kLimitMargin;
    // cmd = gain * h + offset with gain = +-1.
    const double a = (lo - c.offset) / c.gain;
    const double z = (hi - c.offset) / c.gain;
    b.lower[i] = std::max(b.lower[i], std::min(a, z));
    b.upper[i] = std::min(b.upper[i], std::max(a, z));
    if (!(b.lower[i] < b.upper[i]))
      throw ConfigError("joint " + std::to_string(i + 1) +
                        ": calibrated limits leave no usable human range");
  }
  return b;
}

GoalSearch search_goal(const TaskPlan& plan, const Goal& goal, const OperatorModels& models,
                       const HumanParams& current, const OperatorConfig& cfg,
                       std::uint64_t seed) {
  const ParamBounds bounds = operator_bounds(models);
  const Objective obj{plan, goal, models, cfg.tolerance_margin};
  std::mt19937_64 rng(seed);

  std::vector<HumanParams> starts{project(current, bounds)};
  if (goal.joints) starts.push_back(project(uncalibrate(goal.joints->theta, models.retarget), bounds));

  std::size_t evals = 0;
  HumanParams best{};
  double best_value = std::numeric_limits<double>::infinity();
  std::optional<Observation> best_obs;

  const auto evaluate = [&](const HumanParams& p, Observation& obs) {
    ++evals;
    try {
      obs = pipeline_observation(models, p);
    } catch (const TeleopError&) {
      return std::numeric_limits<double>::infinity();
    }
    const double v = obj.value(obs);
    if (v < best_value) {
      best_value = v;
      best = p;
      best_obs = obs;
    }
    return v;
  };

  for (std::size_t s = 0; evals < cfg.max_evaluations; ++s) {
    HumanParams x;
    if (s < starts.size()) {
      x = starts[s];
    } else if (s < starts.size() + cfg.random_starts) {
      for (std::size_t i = 0; i < kDof; ++i)
        x[i] = bounds.lower[i] + uniform01(rng) * (bounds.upper[i] - bounds.lower[i]);
    } else {
      break;
    }

    Observation obs;
    double fx = evaluate(x, obs);
    if (std::isfinite(fx) && obj.satisfied_with_margin(obs)) return {x, evals};

    double step = kInitialStep;
    while (step > kMinStep && evals < cfg.max_evaluations) {
      bool improved = false;
      for (std::size_t i = 0; i < kDof && evals < cfg.max_evaluations; ++i) {
        for (double dir : {1.0, -1.0}) {
          HumanParams y = x;
          y[i] = std::clamp(x[i] + dir * step, bounds.lower[i], bounds.upper[i]);
          if (y[i] == x[i]) continue;
          const double fy = evaluate(y, obs);
          if (fy < fx) {
            x = y;
            fx = fy;
            improved = true;
            if (obj.satisfied_with_margin(obs)) return {x, evals};
            break;
          }
          if (evals >= cfg.max_evaluations) break;
        }
      }
      if (!improved) step *= 0.5;
    }
  }

  if (best_obs && goal_satisfied(plan, goal, *best_obs)) return {best, evals};
  throw Unreachable(goal.index);
}

ScriptedRun scripted_operator(const TaskPlan& plan, const OperatorModels& models,
                              const JointVector& start_posture, const OperatorConfig& cfg) {
  cfg.validate();
  const ParamBounds bounds = operator_bounds(models);
  const double dt = 1.0 / cfg.capture_rate;

  ScriptedRun run;
  run.start_params = project(uncalibrate(start_posture.theta, models.retarget), bounds);

  const auto emit = [&](const HumanParams& p) {
    FrameRecord f = human_arm_fk(models.human, p, models.retarget);
    f.timestamp = static_cast<double>(run.frames.size()) * dt;
    run.frames.push_back(f);
  };

  HumanParams current = run.start_params;
  emit(current);
  const auto dwell_frames = static_cast<std::size_t>(std::llround(cfg.dwell * cfg.capture_rate));

  for (std::size_t k = 0; k < plan.goals.size(); ++k) {
    const std::uint64_t seed = cfg.seed ^ (0x9E3779B97F4A7C15ULL * (k + 1));
    const GoalSearch found = search_goal(plan, plan.goals[k], models, current, cfg, seed);
    const HumanParams goal = found.params;

    // Stretch the motion so the minimum-jerk peak speed (1.875 x mean) stays below the
    // velocity limit on every commanded joint.
    double duration = cfg.goal_duration;
    for (std::size_t i = 0; i < kDof; ++i) {
      const double delta = std::abs(goal[i] - current[i]) * std::abs(models.retarget.calibration[i].gain);
      duration = std::max(duration, 1.875 * delta / (cfg.velocity_fraction * models.limits.max_velocity[i]));
    }
    const auto n = static_cast<std::size_t>(std::ceil(duration * cfg.capture_rate - 1e-9));

    run.goal_first_frame.push_back(run.frames.size());
    for (std::size_t j = 1; j <= n; ++j) {
      const double s = minimum_jerk(static_cast<double>(j) / static_cast<double>(n));
      HumanParams p;
      for (std::size_t i = 0; i < kDof; ++i) p[i] = current[i] + (goal[i] - current[i]) * s;
      emit(j == n ? goal : p);
    }
    for (std::size_t j = 0; j < dwell_frames; ++j) emit(goal);

    run.goal_params.push_back(goal);
    current = goal;
  }
  return run;
}

}  // namespace teleop
