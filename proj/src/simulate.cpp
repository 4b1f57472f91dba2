#include "teleop/simulate.hpp"

#include "teleop/session.hpp"

namespace teleop {

PostureTaskSpec posture_spec_for(const TeleopConfig& cfg, std::optional<std::size_t> participant) {
  PostureTaskSpec spec = cfg.posture;
  if (participant) {
    const auto square = latin_square(spec.postures.size());
    spec.order = square[*participant % square.size()];
  }
  return spec;
}

SimulationResult simulate_task(const TeleopConfig& cfg, const SimulationOptions& opts, Recorder* rec) {
  const OperatorModels models{cfg.human, cfg.chain, cfg.retarget, cfg.limits};
  OperatorConfig op = cfg.op;
  op.seed = opts.seed;

  TaskPlan plan;
  json overrides = json::object();
  if (opts.task == TaskKind::Ring) {
    plan = make_ring_plan(cfg.ring);
  } else {
    const PostureTaskSpec spec = posture_spec_for(cfg, opts.participant);
    plan = make_posture_plan(spec, cfg.chain);
    overrides["order"] = spec.order;
  }

  SimulationResult result;
  result.run = scripted_operator(plan, models, cfg.posture.start_posture, op);

  Session session(cfg);
  if (rec) session.set_recorder(rec);
  constexpr ClientId kOperator = 1;
  session.connect(kOperator);

  std::int64_t seq = 0;
  const auto send = [&](ClientBody body, double t) {
    session.receive(client_message_to_json({++seq, std::move(body)}).dump(), t, kOperator);
  };
  send(StartTaskMsg{opts.task, overrides}, 0.0);
  for (const FrameRecord& f : result.run.frames) {
    if (session.task_state().status != TaskStatus::Running) break;
    send(FrameMsg{f}, f.timestamp);
  }

  const double last = result.run.frames.empty() ? 0.0 : result.run.frames.back().timestamp;
  const double step = 1.0 / cfg.controller.control_rate;
  double t = last;
  while (session.task_state().status == TaskStatus::Running && t < last + opts.settle_time) {
    t += step;
    session.advance_through(t);
  }

  result.log = session.trial_log();
  result.completed = session.task_state().status == TaskStatus::Done;
  result.end_time = t;
  return result;
}

}  // namespace teleop
