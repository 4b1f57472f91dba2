#include "teleop/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "teleop/errors.hpp"

namespace teleop {

void KinematicChain::validate() const {
  if (joints.empty()) throw ConfigError("kinematic chain has no joints");
  for (const auto& j : joints)
    if (std::abs(norm(j.axis) - 1.0) > 1e-9) throw ConfigError("joint axes must be unit length");
  if (!(elbow_link <= wrist_link && wrist_link <= ee_link && ee_link <= joints.size()))
    throw ConfigError("attachment indices must satisfy elbow <= wrist <= ee <= joint count");
}

Pose modified_dh_transform(const ModifiedDhRow& row) {
  const Quat rx = Quat::from_axis_angle({1.0, 0.0, 0.0}, row.alpha);
  return {Vec3{row.a, 0.0, 0.0} + rx.rotate({0.0, 0.0, row.d}), rx};
}

KinematicChain KinematicChain::from_modified_dh(const std::vector<ModifiedDhRow>& rows,
                                                const Pose& base, const Pose& tool,
                                                std::size_t elbow_link, std::size_t wrist_link) {
  KinematicChain chain;
  chain.base = base;
  chain.tool = tool;
  for (const auto& row : rows) chain.joints.push_back({{0.0, 0.0, 1.0}, modified_dh_transform(row)});
  chain.elbow_link = elbow_link;
  chain.wrist_link = wrist_link;
  chain.ee_link = rows.size();
  return chain;
}

KinematicChain default_robot_chain() {
  const std::vector<ModifiedDhRow> dh = {
      {0.0, 0.333, 0.0},        {0.0, 0.0, -kPi / 2},    {0.0, 0.316, kPi / 2},
      {0.0825, 0.0, kPi / 2},   {-0.0825, 0.384, -kPi / 2}, {0.0, 0.0, kPi / 2},
      {0.088, 0.0, kPi / 2},
  };
  // DH x -> task z (forward), DH y -> task x, DH z -> task y (up).
  const Pose base{{}, Quat{0.5, -0.5, -0.5, -0.5}};
  // Flange (0.107 m) plus hand TCP (0.1034 m).
  const Pose tool{{0.0, 0.0, 0.2104}, {}};
  return KinematicChain::from_modified_dh(dh, base, tool, 3, 5);
}

JointLimits default_robot_limits() {
  JointLimits l;
  l.lower = {-2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973};
  l.upper = {2.8973, 1.7628, 2.8973, -0.0698, 2.8973, 3.7525, 2.8973};
  l.max_velocity = {2.1750, 2.1750, 2.1750, 2.1750, 2.6100, 2.6100, 2.6100};
  return l;
}

std::vector<Pose> forward_kinematics(const KinematicChain& chain, std::span<const double> angles) {
  if (angles.size() != chain.joints.size())
    throw DimensionMismatch("chain has " + std::to_string(chain.joints.size()) +
                            " joints but " + std::to_string(angles.size()) +
                            " angles were given");
  std::vector<Pose> poses;
  poses.reserve(chain.joints.size() + 1);
  Pose current = chain.base;
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    const auto& j = chain.joints[i];
    current = current * j.pre * Pose{{}, Quat::from_axis_angle(j.axis, angles[i])};
    poses.push_back(current);
  }
  poses.push_back(current * chain.tool);
  return poses;
}

std::vector<Pose> forward_kinematics(const KinematicChain& chain, const JointVector& joints) {
  return forward_kinematics(chain, std::span<const double>(joints.theta));
}

ElbowWrist robot_elbow_wrist(const KinematicChain& chain, const JointVector& joints) {
  const auto poses = forward_kinematics(chain, joints);
  return {poses.at(chain.elbow_link).position, poses.at(chain.wrist_link).position};
}

void HumanArmModel::validate() const {
  if (!(upper_length > 0.0 && fore_length > 0.0 && hand_length > 0.0))
    throw ConfigError("human arm segment lengths must be positive");
}

SkeletonFrame human_arm_fk(const HumanArmModel& model, const HumanParams& p,
                           const RetargetConfig& cfg) {
  const Vec3 bone_axis{1.0, 0.0, 0.0};
  const double elevation = p[0];
  const double azimuth = p[1];

  const Vec3 upper_dir{std::cos(elevation) * std::cos(azimuth), std::sin(elevation),
                       std::cos(elevation) * std::sin(azimuth)};
  const Quat upper = Quat::from_axis_angle(upper_dir, p[2]) * rotation_between(bone_axis, upper_dir);

  // The elbow bends toward the upper arm's local +y; p[3] = pi is a straight arm.
  const double bend = kPi - p[3];
  const Vec3 fore_dir = upper.rotate({std::cos(bend), std::sin(bend), 0.0});
  const Quat fore = Quat::from_axis_angle(fore_dir, p[4]) * rotation_between(bone_axis, fore_dir);

  SkeletonFrame f;
  f.shoulder = model.shoulder_origin;
  f.elbow = f.shoulder + upper_dir * model.upper_length;
  f.wrist = f.elbow + fore_dir * model.fore_length;
  f.q_upper = cfg.neutral_q_upper * upper;
  f.q_fore = cfg.neutral_q_fore * fore;

  const Vec3& flex_axis = cfg.hand_flexion_axis;
  const Vec3 along = (cfg.neutral_q_hand.conjugate() * f.q_fore.conjugate()).rotate(fore_dir);
  const Vec3 longitudinal = normalized(along - flex_axis * dot(along, flex_axis));
  const Quat wrist_rel =
      Quat::from_axis_angle(longitudinal, p[6]) * Quat::from_axis_angle(flex_axis, p[5]);
  f.q_hand = f.q_fore * cfg.neutral_q_hand * wrist_rel;
  return f;
}

}  // namespace teleop
