#include "teleop/joints.hpp"

#include <algorithm>
#include <string>

#include "teleop/errors.hpp"

namespace teleop {

std::string_view to_string(JointFlag f) {
  switch (f) {
    case JointFlag::Ok:
      return "ok";
    case JointFlag::Clamped:
      return "clamped";
    case JointFlag::Indeterminate:
      return "indeterminate";
  }
  return "ok";
}

bool parse_joint_flag(std::string_view s, JointFlag& out) {
  for (JointFlag f : {JointFlag::Ok, JointFlag::Clamped, JointFlag::Indeterminate}) {
    if (to_string(f) == s) {
      out = f;
      return true;
    }
  }
  return false;
}

void JointLimits::validate() const {
  for (std::size_t i = 0; i < kDof; ++i) {
    if (!(lower[i] < upper[i]))
      throw ConfigError("joint " + std::to_string(i + 1) + ": lower limit must be below upper");
    if (!(max_velocity[i] > 0.0))
      throw ConfigError("joint " + std::to_string(i + 1) + ": max_velocity must be positive");
  }
}

bool JointLimits::contains(const JointVector& j) const {
  for (std::size_t i = 0; i < kDof; ++i)
    if (!(j.theta[i] >= lower[i] && j.theta[i] <= upper[i])) return false;
  return true;
}

JointVector clamp_to_limits(const JointVector& joints, const JointLimits& limits) {
  JointVector out = joints;
  for (std::size_t i = 0; i < kDof; ++i) {
    const double v = std::clamp(joints.theta[i], limits.lower[i], limits.upper[i]);
    if (v != joints.theta[i]) {
      out.theta[i] = v;
      if (out.flags[i] != JointFlag::Indeterminate) out.flags[i] = JointFlag::Clamped;
    }
  }
  return out;
}

}  // namespace teleop
