#include "teleop/controller.hpp"

#include <algorithm>
#include <cmath>

#include "teleop/errors.hpp"

namespace teleop {

void ControllerConfig::validate() const {
  if (!(control_rate > 0.0)) throw ConfigError("control_rate must be positive");
  if (!(smoothing_alpha > 0.0 && smoothing_alpha <= 1.0))
    throw ConfigError("smoothing_alpha must be in (0, 1]");
  limits.validate();
}

ControllerOutput controller_step(const ControllerState& state, const JointVector& target,
                                 double now, const ControllerConfig& cfg) {
  if (now < state.last_time)
    throw NonMonotonicTime("controller step at t=" + std::to_string(now) +
                           " precedes last step at t=" + std::to_string(state.last_time));
  const double dt = now > state.last_time ? now - state.last_time : 1.0 / cfg.control_rate;

  JointVector cmd;
  for (std::size_t i = 0; i < kDof; ++i) {
    const double last = state.last_command.theta[i];
    const bool hold =
        cfg.hold_on_indeterminate && target.flags[i] == JointFlag::Indeterminate;
    const double goal = hold ? last : target.theta[i];

    const double smoothed = last + cfg.smoothing_alpha * (goal - last);
    const double max_step = cfg.limits.max_velocity[i] * dt;
    double value = last + std::clamp(smoothed - last, -max_step, max_step);

    JointFlag flag = hold ? JointFlag::Indeterminate : JointFlag::Ok;
    const double bounded = std::clamp(value, cfg.limits.lower[i], cfg.limits.upper[i]);
    if (bounded != value) {
      value = bounded;
      if (!hold) flag = JointFlag::Clamped;
    }
    cmd.theta[i] = value;
    cmd.flags[i] = flag;
  }
  return {{cmd, now}, cmd};
}

std::vector<TimedCommand> resample_commands(const std::vector<TimedCommand>& input,
                                            const ControllerConfig& cfg,
                                            std::optional<ControllerState> initial) {
  std::vector<TimedCommand> out;
  if (input.empty()) return out;
  for (std::size_t i = 1; i < input.size(); ++i)
    if (input[i].t < input[i - 1].t)
      throw NonMonotonicTime("input timestamp decreases at index " + std::to_string(i));

  const double t0 = input.front().t;
  const double span = input.back().t - t0;
  // The small slack keeps spans like 1.0 s * 100 Hz from flooring to 99.
  const auto ticks = static_cast<std::size_t>(std::floor(span * cfg.control_rate + 1e-9)) + 1;

  ControllerState state;
  if (initial) {
    state = *initial;
  } else {
    state.last_command = clamp_to_limits(input.front().joints, cfg.limits);
    for (auto& f : state.last_command.flags) f = JointFlag::Ok;
    state.last_time = t0;
  }

  out.reserve(ticks);
  std::size_t next = 0;
  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = t0 + static_cast<double>(k) / cfg.control_rate;
    while (next + 1 < input.size() && input[next + 1].t <= t) ++next;
    auto step = controller_step(state, input[next].joints, t, cfg);
    state = step.state;
    out.push_back({t, step.command});
  }
  return out;
}

}  // namespace teleop
