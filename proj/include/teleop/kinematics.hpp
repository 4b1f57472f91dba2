#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "teleop/geometry.hpp"
#include "teleop/joints.hpp"
#include "teleop/retarget.hpp"

namespace teleop {

/// One revolute joint: a fixed transform from the parent frame, then rotation about `axis`.
struct JointDescriptor {
  Vec3 axis{0.0, 0.0, 1.0};
  Pose pre;
};

/// One row of a modified (Craig) Denavit-Hartenberg table: a_{i-1}, d_i, alpha_{i-1}.
struct ModifiedDhRow {
  double a = 0.0;
  double d = 0.0;
  double alpha = 0.0;
};

/// Serial chain of revolute joints with a fixed tool transform after the last joint.
///
/// Pose indices returned by forward_kinematics: 0..n-1 are the joint frames, n is the tool
/// (end-effector). The attachment indices refer to that list.
struct KinematicChain {
  Pose base;
  std::vector<JointDescriptor> joints;
  Pose tool;
  std::size_t elbow_link = 0;
  std::size_t wrist_link = 0;
  std::size_t ee_link = 0;

  /// Throws ConfigError on an empty chain, non-unit axes or out-of-order attachments.
  void validate() const;

  static KinematicChain from_modified_dh(const std::vector<ModifiedDhRow>& rows,
                                         const Pose& base, const Pose& tool,
                                         std::size_t elbow_link, std::size_t wrist_link);
};

/// Pose of the frame produced by one modified-DH row at zero joint angle.
Pose modified_dh_transform(const ModifiedDhRow& row);

/// Default FR3-class arm: Franka modified-DH geometry, base turned so the DH z-axis is the
/// task frame's +y (up) and DH x is +z (forward), tool at the hand TCP.
KinematicChain default_robot_chain();
JointLimits default_robot_limits();

/// Joint frames followed by the tool pose. Throws DimensionMismatch when the angle count
/// differs from the joint count.
std::vector<Pose> forward_kinematics(const KinematicChain& chain, std::span<const double> angles);
std::vector<Pose> forward_kinematics(const KinematicChain& chain, const JointVector& joints);

struct ElbowWrist {
  Vec3 elbow;
  Vec3 wrist;
};
ElbowWrist robot_elbow_wrist(const KinematicChain& chain, const JointVector& joints);

/// Parametric human right arm. Parameters, in order: elevation, azimuth, upper-arm twist,
/// elbow angle (pi = straight), forearm twist, wrist flexion, wrist twist. These are the
/// raw angles retarget_frame recovers.
struct HumanArmModel {
  Vec3 shoulder_origin;
  double upper_length = 0.30;
  double fore_length = 0.27;
  double hand_length = 0.08;

  void validate() const;
};

using HumanParams = std::array<double, kDof>;

/// Builds the skeleton frame whose retargeting under `cfg` yields `params`.
SkeletonFrame human_arm_fk(const HumanArmModel& model, const HumanParams& params,
                           const RetargetConfig& cfg = {});

}  // namespace teleop
