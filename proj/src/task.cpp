#include "teleop/task.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "teleop/errors.hpp"

namespace teleop {

namespace {

struct PlaneBasis {
  Vec3 u;  // in-plane "right"
  Vec3 v;  // in-plane "up"
};

PlaneBasis plane_basis(const Vec3& normal) {
  const Vec3 n = normalized(normal);
  Vec3 up{0.0, 1.0, 0.0};
  if (std::abs(dot(up, n)) > 0.999) up = {0.0, 0.0, 1.0};
  const Vec3 v = normalized(up - n * dot(up, n));
  return {cross(v, n), v};
}

}  // namespace

std::string_view to_string(TaskKind k) { return k == TaskKind::Ring ? "ring" : "posture"; }

std::optional<TaskKind> parse_task_kind(std::string_view s) {
  if (s == "ring") return TaskKind::Ring;
  if (s == "posture") return TaskKind::Posture;
  return std::nullopt;
}

std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::Idle:
      return "idle";
    case TaskStatus::Running:
      return "running";
    case TaskStatus::Done:
      return "done";
  }
  return "idle";
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::GoalShown:
      return "goal_shown";
    case EventKind::GoalAchieved:
      return "goal_achieved";
    case EventKind::Clamp:
      return "clamp";
  }
  return "goal_shown";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (EventKind k : {EventKind::GoalShown, EventKind::GoalAchieved, EventKind::Clamp})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

void RingTaskSpec::validate() const {
  if (!(target_diameter > 0.0 && radius > target_diameter / 2))
    throw ConfigError("ring task needs radius > target_diameter / 2 > 0");
  if (count < 2) throw ConfigError("ring task needs at least 2 targets");
  if (!(perpendicular_tolerance > 0.0)) throw ConfigError("perpendicular_tolerance must be positive");
  if (std::abs(norm(normal) - 1.0) > 1e-9) throw ConfigError("ring plane normal must be unit length");
}

void PostureTaskSpec::validate(const JointLimits& limits) const {
  if (!(tolerance > 0.0)) throw ConfigError("posture tolerance must be positive");
  if (postures.empty()) throw ConfigError("posture task has no postures");
  for (const auto& p : postures)
    if (!limits.contains(p.joints))
      throw ConfigError("posture '" + p.label + "' lies outside the joint limits");
  if (!limits.contains(start_posture)) throw ConfigError("start posture lies outside the joint limits");
  if (!order.empty()) {
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    bool ok = sorted.size() == postures.size();
    for (std::size_t i = 0; ok && i < sorted.size(); ++i) ok = sorted[i] == i;
    if (!ok)
      throw ConfigError("posture order must be a permutation of the posture indices");
  }
}

PostureTaskSpec default_posture_spec() {
  PostureTaskSpec spec;
  spec.postures = {
      {"elbow up, wrist up", JointVector::from({0.0, 0.3, 0.0, -0.6, 0.0, 0.5, 0.0})},
      {"elbow up, wrist down", JointVector::from({0.0, 0.3, 0.0, -2.0, 0.0, 0.5, 0.0})},
      {"elbow down, wrist up", JointVector::from({0.0, 1.0, 0.0, -0.4, 0.0, 0.5, 0.0})},
      {"elbow down, wrist down", JointVector::from({0.0, 1.0, 0.0, -2.0, 0.0, 0.5, 0.0})},
  };
  spec.start_posture = JointVector::from({0.0, 0.0, 0.0, -0.0698, 0.0, 0.0, 0.0});
  return spec;
}

std::vector<Vec3> ring_target_positions(const RingTaskSpec& spec) {
  const PlaneBasis b = plane_basis(spec.normal);
  std::vector<Vec3> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const double a = kPi / 2 + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(spec.count);
    out.push_back(spec.center + spec.radius * (std::cos(a) * b.u + std::sin(a) * b.v));
  }
  return out;
}

RingSequence ring_sequence(std::size_t count) {
  if (count < 2) throw DomainError("ring_sequence needs count >= 2");
  RingSequence seq;
  const std::size_t natural = (count + 1) / 2;
  seq.stride = natural;
  if (std::gcd(natural, count) != 1) {
    seq.stride_adjusted = true;
    for (std::size_t d = 1;; ++d) {
      if (natural + d < count && std::gcd(natural + d, count) == 1) {
        seq.stride = natural + d;
        break;
      }
      if (natural > d && std::gcd(natural - d, count) == 1) {
        seq.stride = natural - d;
        break;
      }
    }
  }
  seq.order.reserve(count);
  for (std::size_t k = 0; k < count; ++k) seq.order.push_back((k * seq.stride) % count);
  return seq;
}

bool selection_test(const Vec3& ee, const Vec3& target, const RingTaskSpec& spec) {
  const Vec3 d = ee - target;
  const double perp = dot(d, spec.normal);
  if (!(std::abs(perp) <= spec.perpendicular_tolerance)) return false;
  if (!spec.require_in_plane) return true;
  return norm(d - spec.normal * perp) <= spec.target_diameter / 2;
}

bool posture_match_test(const Vec3& elbow, const Vec3& wrist, const Vec3& goal_elbow,
                        const Vec3& goal_wrist, double tol) {
  return distance(elbow, goal_elbow) <= tol && distance(wrist, goal_wrist) <= tol;
}

TaskPlan make_ring_plan(const RingTaskSpec& spec) {
  spec.validate();
  TaskPlan plan;
  plan.kind = TaskKind::Ring;
  plan.ring = spec;
  const auto targets = ring_target_positions(spec);
  for (std::size_t idx : ring_sequence(spec.count).order) {
    Goal g;
    g.index = idx;
    g.label = "target " + std::to_string(idx);
    g.target = targets[idx];
    plan.goals.push_back(g);
  }
  return plan;
}

TaskPlan make_posture_plan(const PostureTaskSpec& spec, const KinematicChain& chain) {
  TaskPlan plan;
  plan.kind = TaskKind::Posture;
  plan.posture_tolerance = spec.tolerance;
  std::vector<std::size_t> order = spec.order;
  if (order.empty()) {
    order.resize(spec.postures.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  for (std::size_t idx : order) {
    const auto& p = spec.postures.at(idx);
    const ElbowWrist ew = robot_elbow_wrist(chain, p.joints);
    Goal g;
    g.index = idx;
    g.label = p.label;
    g.elbow = ew.elbow;
    g.wrist = ew.wrist;
    g.joints = p.joints;
    plan.goals.push_back(g);
  }
  return plan;
}

Observation observe(const KinematicChain& chain, const JointVector& joints) {
  const auto poses = forward_kinematics(chain, joints);
  return {poses.at(chain.ee_link).position, poses.at(chain.elbow_link).position,
          poses.at(chain.wrist_link).position};
}

bool goal_satisfied(const TaskPlan& plan, const Goal& goal, const Observation& obs) {
  if (plan.kind == TaskKind::Ring) return selection_test(obs.ee, goal.target, plan.ring);
  return posture_match_test(obs.elbow, obs.wrist, goal.elbow, goal.wrist, plan.posture_tolerance);
}

namespace {

TaskEvent shown_event(const TaskPlan& plan, std::size_t step, double now) {
  const Goal& g = plan.goals[step];
  TaskEvent e{now, EventKind::GoalShown, g.index, json::object()};
  e.payload["step"] = step;
  if (plan.kind == TaskKind::Ring)
    e.payload["target"] = g.target;
  else
    e.payload["label"] = g.label;
  return e;
}

}  // namespace

TaskStep start_task(const TaskPlan& plan, double now) {
  TaskStep step;
  step.state.kind = plan.kind;
  step.state.shown_at.assign(plan.goals.size(), std::nullopt);
  step.state.achieved_at.assign(plan.goals.size(), std::nullopt);
  if (plan.goals.empty()) {
    step.state.status = TaskStatus::Done;
    return step;
  }
  step.state.status = TaskStatus::Running;
  step.state.shown_at[0] = now;
  step.events.push_back(shown_event(plan, 0, now));
  return step;
}

TaskStep task_advance(const TaskState& state, const TaskPlan& plan, const Observation& obs,
                      double now) {
  TaskStep step{state, {}};
  if (state.status != TaskStatus::Running) return step;
  const std::size_t k = state.active_index;
  if (!goal_satisfied(plan, plan.goals[k], obs)) return step;

  TaskState& s = step.state;
  s.achieved_at[k] = now;
  TaskEvent done{now, EventKind::GoalAchieved, plan.goals[k].index, json::object()};
  done.payload["step"] = k;
  done.payload["movement_time"] = now - *s.shown_at[k];
  step.events.push_back(std::move(done));

  if (k + 1 < plan.goals.size()) {
    s.active_index = k + 1;
    s.shown_at[k + 1] = now;
    step.events.push_back(shown_event(plan, k + 1, now));
  } else {
    s.status = TaskStatus::Done;
  }
  return step;
}

std::vector<std::vector<std::size_t>> latin_square(std::size_t n) {
  if (n == 0) throw DomainError("latin_square needs n >= 1");
  std::vector<std::size_t> first;
  first.reserve(n);
  first.push_back(0);
  for (std::size_t lo = 1, hi = n - 1; first.size() < n;) {
    first.push_back(lo++);
    if (first.size() < n) first.push_back(hi--);
  }
  std::vector<std::vector<std::size_t>> square(n, std::vector<std::size_t>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) square[r][c] = (first[c] + r) % n;
  return square;
}

std::string serialize_trial_log(const TrialLog& log) {
  std::string out;
  for (const auto& e : log.events) {
    json j;
    j["t"] = e.t;
    j["event"] = std::string(to_string(e.kind));
    j["goal_index"] = e.goal_index;
    j["payload"] = e.payload;
    out += j.dump();
    out += '\n';
  }
  return out;
}

TrialLog parse_trial_log(std::string_view text) {
  TrialLog log;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, e.byte, "malformed JSON");
    }
    if (!j.is_object()) throw ParseError(line_no, 1, "expected a JSON object");
    for (const char* field : {"t", "event", "goal_index"})
      if (!j.contains(field)) throw SchemaError(line_no, field);
    TaskEvent e;
    try {
      e.t = j.at("t").get<double>();
      const auto kind = parse_event_kind(j.at("event").get<std::string>());
      if (!kind) throw ParseError(line_no, 0, "unknown event '" + j.at("event").get<std::string>() + "'");
      e.kind = *kind;
      e.goal_index = j.at("goal_index").get<std::size_t>();
    } catch (const json::exception& ex) {
      throw ParseError(line_no, 0, ex.what());
    }
    if (j.contains("payload")) e.payload = j["payload"];
    if (!log.events.empty() && e.t < log.events.back().t)
      throw ParseError(line_no, 0, "events are not time-ordered");
    log.events.push_back(std::move(e));
  }
  return log;
}

MetricsSummary summarize(const TrialLog& log) {
  struct Open {
    std::size_t goal;
    double shown;
    std::optional<double> achieved;
  };
  std::vector<Open> entries;
  MetricsSummary m;
  for (const auto& e : log.events) {
    switch (e.kind) {
      case EventKind::GoalShown:
        entries.push_back({e.goal_index, e.t, std::nullopt});
        break;
      case EventKind::GoalAchieved: {
        auto it = std::find_if(entries.rbegin(), entries.rend(), [&](const Open& o) {
          return o.goal == e.goal_index && !o.achieved;
        });
        if (it == entries.rend())
          throw IncompleteTrial("goal " + std::to_string(e.goal_index) +
                                " achieved without being shown");
        it->achieved = e.t;
        break;
      }
      case EventKind::Clamp:
        ++m.clamp_events;
        break;
    }
  }
  if (entries.empty()) throw IncompleteTrial("trial log contains no goals");
  for (const auto& o : entries) {
    if (!o.achieved)
      throw IncompleteTrial("goal " + std::to_string(o.goal) + " was never achieved");
    m.movement_times.push_back({o.goal, o.shown, *o.achieved, *o.achieved - o.shown});
  }
  const double n = static_cast<double>(m.movement_times.size());
  double sum = 0.0;
  for (const auto& mt : m.movement_times) sum += mt.movement_time;
  m.mean = sum / n;
  if (m.movement_times.size() > 1) {
    double ss = 0.0;
    for (const auto& mt : m.movement_times) ss += (mt.movement_time - m.mean) * (mt.movement_time - m.mean);
    m.sd = std::sqrt(ss / (n - 1.0));
  }
  return m;
}

json metrics_to_json(const MetricsSummary& m) {
  json j;
  j["count"] = m.movement_times.size();
  j["movement_times"] = json::array();
  for (const auto& mt : m.movement_times)
    j["movement_times"].push_back({{"goal_index", mt.goal_index},
                                   {"shown_at", mt.shown_at},
                                   {"achieved_at", mt.achieved_at},
                                   {"movement_time", mt.movement_time}});
  j["mean"] = m.mean;
  j["sd"] = m.sd;
  j["clamp_events"] = m.clamp_events;
  return j;
}

}  // namespace teleop
