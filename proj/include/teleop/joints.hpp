#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace teleop {

inline constexpr std::size_t kDof = 7;

enum class JointFlag { Ok, Clamped, Indeterminate };

std::string_view to_string(JointFlag f);
/// Inverse of to_string; returns false for unknown names.
bool parse_joint_flag(std::string_view s, JointFlag& out);

/// Seven robot joint angles (radians), index 0 holds theta1.
struct JointVector {
  std::array<double, kDof> theta{};
  std::array<JointFlag, kDof> flags{};

  static JointVector from(const std::array<double, kDof>& values) {
    JointVector j;
    j.theta = values;
    return j;
  }
  bool operator==(const JointVector&) const = default;
};

/// Position and velocity limits of the robot joints.
struct JointLimits {
  std::array<double, kDof> lower{};
  std::array<double, kDof> upper{};
  std::array<double, kDof> max_velocity{};

  /// Throws ConfigError unless lower < upper and max_velocity > 0 for every joint.
  void validate() const;
  bool contains(const JointVector& j) const;
};

/// Per-joint clamp into [lower, upper]. Clipped joints are set exactly to the bound and
/// flagged Clamped; an Indeterminate flag is kept. Idempotent.
JointVector clamp_to_limits(const JointVector& joints, const JointLimits& limits);

}  // namespace teleop
