#include "teleop/retarget.hpp"

#include <algorithm>
#include <cmath>

#include "teleop/errors.hpp"

namespace teleop {

namespace {

// Below this magnitude of (w, v.axis) the twist angle carries no information.
constexpr double kTwistSingularity = 1e-9;

AngleResult from_decomposition(const SwingTwist& st) {
  return {st.twist_angle, st.indeterminate ? JointFlag::Indeterminate : JointFlag::Ok};
}

}  // namespace

std::array<JointCalibration, kDof> RetargetConfig::default_calibration() {
  std::array<JointCalibration, kDof> c{};
  c[3].offset = -kPi;
  return c;
}

void RetargetConfig::validate() const {
  for (std::size_t i = 0; i < kDof; ++i) {
    const double g = calibration[i].gain;
    if (g != 1.0 && g != -1.0)
      throw ConfigError("calibration gain of joint " + std::to_string(i + 1) +
                        " must be +1 or -1");
    if (!std::isfinite(calibration[i].offset))
      throw ConfigError("calibration offset of joint " + std::to_string(i + 1) +
                        " is not finite");
  }
  if (std::abs(norm(hand_flexion_axis) - 1.0) > 1e-9)
    throw ConfigError("hand_flexion_axis must be unit length");
  for (const Quat* q : {&neutral_q_upper, &neutral_q_fore, &neutral_q_hand})
    if (std::abs(q->norm() - 1.0) > 1e-9)
      throw ConfigError("neutral orientations must be unit quaternions");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

SegmentVectors segment_vectors(const SkeletonFrame& frame, double eps) {
  SegmentVectors seg{frame.elbow - frame.shoulder, frame.wrist - frame.elbow};
  if (!(norm(seg.upper_arm) > eps)) throw DegenerateSegment("upper arm segment has zero length");
  if (!(norm(seg.forearm) > eps)) throw DegenerateSegment("forearm segment has zero length");
  return seg;
}

AngleResult joint_theta2(const SegmentVectors& seg, double eps) {
  const Vec3& u = seg.upper_arm;
  if (std::hypot(u.x, u.z) < eps) return {0.0, JointFlag::Indeterminate};
  return {std::atan2(u.z, u.x), JointFlag::Ok};
}

double joint_theta1(const SegmentVectors& seg) {
  const Vec3& u = seg.upper_arm;
  return std::atan2(u.y, std::hypot(u.x, u.z));
}

double joint_theta4(const SegmentVectors& seg, double eps) {
  const double nu = norm(seg.upper_arm);
  const double nf = norm(seg.forearm);
  if (!(nu > eps) || !(nf > eps)) throw DegenerateSegment("segment has zero length");
  const double c = -dot(seg.upper_arm, seg.forearm) / (nu * nf);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

SwingTwist swing_twist(const Quat& q, const Vec3& unit_axis) {
  const Quat c = q.canonical();
  const double s = dot(c.vec(), unit_axis);
  const double mag = std::hypot(c.w, s);
  SwingTwist out;
  if (mag < kTwistSingularity) {
    out.swing = q;
    out.indeterminate = true;
    return out;
  }
  const Vec3 p = unit_axis * (s / mag);
  out.twist = Quat{c.w / mag, p.x, p.y, p.z};
  out.swing = q * out.twist.conjugate();
  double angle = 2.0 * std::atan2(s, c.w);
  if (angle <= -kPi) angle += 2.0 * kPi;
  out.twist_angle = angle;
  return out;
}

TwistJoints twist_joints(const SkeletonFrame& frame, const SegmentVectors& seg,
                         const RetargetConfig& cfg) {
  const Quat rel_upper = cfg.neutral_q_upper.conjugate() * frame.q_upper;
  const Quat rel_fore = cfg.neutral_q_fore.conjugate() * frame.q_fore;
  return {from_decomposition(swing_twist(rel_upper, normalized(seg.upper_arm))),
          from_decomposition(swing_twist(rel_fore, normalized(seg.forearm)))};
}

Vec3 hand_longitudinal_axis(const SkeletonFrame& frame, const SegmentVectors& seg,
                            const RetargetConfig& cfg) {
  const Quat to_reference = cfg.neutral_q_hand.conjugate() * frame.q_fore.conjugate();
  const Vec3 along = to_reference.rotate(normalized(seg.forearm));
  const Vec3& h = cfg.hand_flexion_axis;
  return along - h * dot(along, h);
}

WristJoints wrist_joints(const SkeletonFrame& frame, const SegmentVectors& seg,
                         const RetargetConfig& cfg) {
  const Quat rel = cfg.neutral_q_hand.conjugate() * frame.q_fore.conjugate() * frame.q_hand;
  const SwingTwist flexion = swing_twist(rel, cfg.hand_flexion_axis);

  WristJoints out;
  out.theta6 = from_decomposition(flexion);

  const Vec3 axis = hand_longitudinal_axis(frame, seg, cfg);
  const double n = norm(axis);
  if (n < cfg.epsilon) {
    out.theta7 = {0.0, JointFlag::Indeterminate};
    return out;
  }
  out.theta7 = from_decomposition(swing_twist(flexion.swing, axis / n));
  return out;
}

JointVector retarget_frame(const SkeletonFrame& frame, const RetargetConfig& cfg) {
  const SegmentVectors seg = segment_vectors(frame, cfg.epsilon);
  const AngleResult t2 = joint_theta2(seg, cfg.epsilon);
  const TwistJoints tw = twist_joints(frame, seg, cfg);
  const WristJoints wr = wrist_joints(frame, seg, cfg);

  JointVector j;
  j.theta = {joint_theta1(seg),        t2.angle,        tw.theta3.angle,
             joint_theta4(seg, cfg.epsilon), tw.theta5.angle, wr.theta6.angle,
             wr.theta7.angle};
  j.flags = {JointFlag::Ok,  t2.flag,        tw.theta3.flag, JointFlag::Ok,
             tw.theta5.flag, wr.theta6.flag, wr.theta7.flag};
  return j;
}

JointVector calibrate_joints(const JointVector& raw, const RetargetConfig& cfg,
                             const JointLimits& limits) {
  JointVector cmd = raw;
  for (std::size_t i = 0; i < kDof; ++i)
    cmd.theta[i] = cfg.calibration[i].gain * raw.theta[i] + cfg.calibration[i].offset;
  return clamp_to_limits(cmd, limits);
}

std::array<double, kDof> uncalibrate(const std::array<double, kDof>& command,
                                     const RetargetConfig& cfg) {
  std::array<double, kDof> raw{};
  for (std::size_t i = 0; i < kDof; ++i)
    raw[i] = (command[i] - cfg.calibration[i].offset) * cfg.calibration[i].gain;
  return raw;
}

}  // namespace teleop
