#pragma once

// Mapping of one tracked human right-arm pose onto the seven robot joint angles.
//
// Position-based joints:
//   upper_arm = elbow - shoulder,  forearm = wrist - elbow
//   theta1 = atan2(y_u, sqrt(x_u^2 + z_u^2))          elevation of the upper arm
//   theta2 = atan2(z_u, x_u)                           azimuth of the upper arm
//   theta4 = acos(-(upper_arm . forearm) / (|upper_arm| |forearm|))   elbow, pi when straight
//
// Orientation-based joints come from swing-twist decomposition of the tracked rigid-body
// orientations relative to configurable neutral orientations:
//   theta3  twist of the upper arm about the upper-arm axis
//   theta5  twist of the forearm about the forearm axis
//   theta6  hand flexion about a configured hand-local axis
//   theta7  twist of the remaining hand swing about the forearm direction

#include <array>

#include "teleop/geometry.hpp"
#include "teleop/joints.hpp"

namespace teleop {

inline constexpr double kDefaultEpsilon = 1e-9;

/// One timestamped capture of the operator's right arm.
struct SkeletonFrame {
  double timestamp = 0.0;
  Vec3 shoulder;
  Vec3 elbow;
  Vec3 wrist;
  Quat q_upper;
  Quat q_fore;
  Quat q_hand;

  bool operator==(const SkeletonFrame&) const = default;
};

struct SegmentVectors {
  Vec3 upper_arm;
  Vec3 forearm;
};

struct JointCalibration {
  double gain = 1.0;  // exactly +1 or -1
  double offset = 0.0;
};

struct RetargetConfig {
  Quat neutral_q_upper;
  Quat neutral_q_fore;
  Quat neutral_q_hand;
  Vec3 hand_flexion_axis{0.0, 0.0, 1.0};
  std::array<JointCalibration, kDof> calibration = default_calibration();
  double epsilon = kDefaultEpsilon;

  /// Gains +1, offsets 0 except joint 4 at -pi: a straight human elbow (pi) lands on the
  /// robot's upper elbow limit just below zero.
  static std::array<JointCalibration, kDof> default_calibration();

  /// Throws ConfigError on non-unit gains, non-unit axis or non-positive epsilon.
  void validate() const;
};

struct AngleResult {
  double angle = 0.0;
  JointFlag flag = JointFlag::Ok;
};

struct SwingTwist {
  Quat swing;
  Quat twist;
  double twist_angle = 0.0;  // (-pi, pi]
  bool indeterminate = false;
};

/// Throws DegenerateSegment when either segment is not longer than `eps`.
SegmentVectors segment_vectors(const SkeletonFrame& frame, double eps = kDefaultEpsilon);

/// Indeterminate (value 0) when the upper arm is within `eps` of the vertical axis.
AngleResult joint_theta2(const SegmentVectors& seg, double eps = kDefaultEpsilon);
double joint_theta1(const SegmentVectors& seg);
/// Result in [0, pi]. Throws DegenerateSegment on zero-length input.
double joint_theta4(const SegmentVectors& seg, double eps = kDefaultEpsilon);

/// Factor `q` as swing * twist with the twist purely about `unit_axis` and the swing free
/// of any component along it. A 180 degree swing leaves the twist undefined; it is then
/// reported as indeterminate with angle 0 and swing = q.
SwingTwist swing_twist(const Quat& q, const Vec3& unit_axis);

struct TwistJoints {
  AngleResult theta3;
  AngleResult theta5;
};
TwistJoints twist_joints(const SkeletonFrame& frame, const SegmentVectors& seg,
                         const RetargetConfig& cfg);

struct WristJoints {
  AngleResult theta6;
  AngleResult theta7;
};
WristJoints wrist_joints(const SkeletonFrame& frame, const SegmentVectors& seg,
                         const RetargetConfig& cfg);

/// Hand longitudinal axis used for theta7: forearm direction in the hand reference frame,
/// made orthogonal to the flexion axis.
Vec3 hand_longitudinal_axis(const SkeletonFrame& frame, const SegmentVectors& seg,
                            const RetargetConfig& cfg);

/// Raw joint angles for one frame. Pure; throws DegenerateSegment.
JointVector retarget_frame(const SkeletonFrame& frame, const RetargetConfig& cfg);

/// gain * raw + offset per joint, then clamped to the limits.
JointVector calibrate_joints(const JointVector& raw, const RetargetConfig& cfg,
                             const JointLimits& limits);

/// Inverse of the affine calibration (no clamping).
std::array<double, kDof> uncalibrate(const std::array<double, kDof>& command,
                                     const RetargetConfig& cfg);

}  // namespace teleop
