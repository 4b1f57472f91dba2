#include "teleop/session.hpp"

#include <cmath>

#include "teleop/errors.hpp"
#include "teleop/recording.hpp"
#include "teleop/retarget.hpp"

namespace teleop {

Session::Session(const TeleopConfig& cfg, double t0) : cfg_(cfg), t0_(t0) {
  cfg_.controller.limits = cfg_.limits;
  cfg_.validate();
  reset_controller(t0);
}

void Session::reset_controller(double now) {
  ctrl_.last_command = clamp_to_limits(cfg_.posture.start_posture, cfg_.limits);
  for (auto& f : ctrl_.last_command.flags) f = JointFlag::Ok;
  ctrl_.last_time = std::max(now, ctrl_.last_time);
  target_.reset();
  pending_.reset();
  degenerate_burst_ = false;
  clamped_ = false;
}

void Session::set_recorder(Recorder* rec) {
  recorder_ = rec;
  if (rec) rec->begin(t0_);
}

void Session::connect(ClientId id) {
  subscriptions_[id] = {std::begin(kAllTopics), std::end(kAllTopics)};
  ack_seq_.emplace(id, 0);
}

void Session::disconnect(ClientId id) {
  subscriptions_.erase(id);
  ack_seq_.erase(id);
  if (pending_ && pending_->from == id) pending_->from = 0;
}

bool Session::wants(ClientId id, Topic topic) const {
  const auto it = subscriptions_.find(id);
  return it != subscriptions_.end() && it->second.count(topic) > 0;
}

std::vector<ClientId> Session::clients() const {
  std::vector<ClientId> ids;
  for (const auto& [id, _] : subscriptions_) ids.push_back(id);
  return ids;
}

double Session::next_tick_time() const {
  return t0_ + static_cast<double>(next_tick_) / cfg_.controller.control_rate;
}

void Session::emit(std::vector<Outgoing>& out, json msg, std::optional<ClientId> to) {
  if (recorder_) recorder_->output(msg, to);
  out.push_back({std::move(msg), to});
}

std::vector<Outgoing> Session::receive(std::string_view text, double now, ClientId from) {
  if (recorder_) recorder_->input(text, now, from);
  std::vector<Outgoing> out = run_ticks(now, false);
  // Never handle a message before a tick that already ran.
  const double t = std::max(now, ctrl_.last_time);
  try {
    handle(parse_client_message(text), t, from, out);
  } catch (const ProtocolError& e) {
    emit(out, make_error(e.code(), e.what()), from);
  }
  return out;
}

std::vector<Outgoing> Session::advance_through(double now) {
  if (recorder_) recorder_->advance(now);
  return run_ticks(now, true);
}

std::vector<Outgoing> Session::run_ticks(double now, bool inclusive) {
  std::vector<Outgoing> out;
  while (true) {
    const double t = next_tick_time();
    if (inclusive ? t > now : t >= now) break;
    tick(t, out);
    ++next_tick_;
  }
  return out;
}

void Session::tick(double t, std::vector<Outgoing>& out) {
  if (pending_) {
    try {
      const JointVector raw = retarget_frame(pending_->frame, cfg_.retarget);
      target_ = calibrate_joints(raw, cfg_.retarget, cfg_.limits);
      degenerate_burst_ = false;
    } catch (const DegenerateSegment& e) {
      // Hold the previous target; report once until a good frame arrives.
      if (!degenerate_burst_ && pending_->from != 0)
        emit(out, make_error("degenerate_frame", e.what()), pending_->from);
      degenerate_burst_ = true;
    }
    pending_.reset();
  }

  const JointVector target = target_.value_or(ctrl_.last_command);
  const ControllerOutput step = controller_step(ctrl_, target, t, cfg_.controller);
  ctrl_ = step.state;
  JointVector cmd = step.command;
  for (std::size_t i = 0; i < kDof; ++i)
    if (target.flags[i] == JointFlag::Clamped && cmd.flags[i] == JointFlag::Ok)
      cmd.flags[i] = JointFlag::Clamped;

  const auto poses = forward_kinematics(cfg_.chain, cmd);
  const Observation obs{poses.at(cfg_.chain.ee_link).position,
                        poses.at(cfg_.chain.elbow_link).position,
                        poses.at(cfg_.chain.wrist_link).position};

  emit(out, {{"type", "joint_state"}, {"t", t}, {"theta", cmd.theta}, {"flags", flags_to_json(cmd.flags)}});
  json frames = json::array();
  for (const Pose& p : poses) frames.push_back({{"p", p.position}, {"q", p.orientation}});
  emit(out, {{"type", "poses"},
             {"t", t},
             {"elbow", obs.elbow},
             {"wrist", obs.wrist},
             {"ee", obs.ee},
             {"base", {{"p", cfg_.chain.base.position}, {"q", cfg_.chain.base.orientation}}},
             {"frames", frames}});

  json clamped_joints = json::array();
  for (std::size_t i = 0; i < kDof; ++i)
    if (cmd.flags[i] == JointFlag::Clamped) clamped_joints.push_back(i);
  const bool clamped = !clamped_joints.empty();

  if (plan_ && task_.status == TaskStatus::Running) {
    if (clamped && !clamped_) {
      TaskEvent e{t, EventKind::Clamp, plan_->goals[task_.active_index].index,
                  {{"joints", clamped_joints}}};
      log_.events.push_back(e);
      emit(out, task_event_msg(e));
    }
    TaskStep next = task_advance(task_, *plan_, obs, t);
    const bool finished = next.state.status != task_.status;
    task_ = std::move(next.state);
    for (const auto& e : next.events) {
      log_.events.push_back(e);
      emit(out, task_event_msg(e));
    }
    if (finished) emit(out, task_state_msg(t));
  }
  clamped_ = clamped;
}

void Session::handle(const ClientMsg& msg, double now, ClientId from, std::vector<Outgoing>& out) {
  const auto ack = [&] { emit(out, make_ack(++ack_seq_[from], msg.seq), from); };

  if (const auto* f = std::get_if<FrameMsg>(&msg.body)) {
    pending_ = Pending{f->frame, from};
    ack();
  } else if (const auto* s = std::get_if<StartTaskMsg>(&msg.body)) {
    if (task_.status == TaskStatus::Running) {
      emit(out, make_error("bad_state", "a task is already running; send reset first"), from);
      return;
    }
    TaskPlan plan;
    try {
      if (s->kind == TaskKind::Ring) {
        RingTaskSpec spec = cfg_.ring;
        read_ring_task(s->overrides, spec);
        plan = make_ring_plan(spec);
      } else {
        PostureTaskSpec spec = cfg_.posture;
        read_posture_task(s->overrides, spec);
        spec.validate(cfg_.limits);
        plan = make_posture_plan(spec, cfg_.chain);
      }
    } catch (const ConfigError& e) {
      emit(out, make_error("bad_message", e.what()), from);
      return;
    }
    plan_ = std::move(plan);
    TaskStep step = start_task(*plan_, now);
    task_ = std::move(step.state);
    log_ = {};
    clamped_ = false;
    ack();
    for (const auto& e : step.events) {
      log_.events.push_back(e);
      emit(out, task_event_msg(e));
    }
    emit(out, task_state_msg(now));
  } else if (std::holds_alternative<ResetMsg>(msg.body)) {
    plan_.reset();
    task_ = {};
    log_ = {};
    reset_controller(now);
    ack();
    emit(out, task_state_msg(now));
  } else if (const auto* c = std::get_if<SetConditionMsg>(&msg.body)) {
    condition_ = c->value;
    ack();
    emit(out, task_state_msg(now));
  } else if (const auto* sub = std::get_if<SubscribeMsg>(&msg.body)) {
    subscriptions_[from] = {sub->topics.begin(), sub->topics.end()};
    ack();
    // Snapshot for (re)connecting clients, addressed to the subscriber only.
    if (wants(from, Topic::Task)) emit(out, task_state_msg(now), from);
  }
}

json Session::task_event_msg(const TaskEvent& e) const {
  return {{"type", "task_event"},
          {"t", e.t},
          {"event", to_string(e.kind)},
          {"goal", e.goal_index},
          {"payload", e.payload}};
}

json Session::task_state_msg(double now) const {
  json j = {{"type", "task_state"},
            {"t", now},
            {"status", to_string(task_.status)},
            {"condition", to_string(condition_)}};
  if (!plan_) {
    j["kind"] = nullptr;
    j["goals"] = json::array();
    return j;
  }
  j["kind"] = to_string(plan_->kind);
  j["step"] = task_.active_index;
  j["goal"] = plan_->goals.empty() ? json(nullptr) : json(plan_->goals[task_.active_index].index);
  json goals = json::array();
  for (std::size_t k = 0; k < plan_->goals.size(); ++k) {
    const Goal& g = plan_->goals[k];
    json gj = {{"index", g.index}, {"label", g.label}, {"achieved", task_.achieved_at[k].has_value()}};
    if (plan_->kind == TaskKind::Ring) {
      gj["target"] = g.target;
    } else {
      gj["elbow"] = g.elbow;
      gj["wrist"] = g.wrist;
    }
    goals.push_back(gj);
  }
  j["goals"] = goals;
  if (plan_->kind == TaskKind::Ring) {
    j["ring"] = {{"center", plan_->ring.center},
                 {"radius", plan_->ring.radius},
                 {"normal", plan_->ring.normal},
                 {"target_diameter", plan_->ring.target_diameter}};
  } else {
    j["tolerance"] = plan_->posture_tolerance;
  }
  return j;
}

}  // namespace teleop
