#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "teleop/errors.hpp"
#include "teleop/kinematics.hpp"
#include "teleop/retarget.hpp"

using namespace teleop;

namespace {

SegmentVectors seg(Vec3 u, Vec3 f = {1, 0, 0}) { return {u, f}; }

SkeletonFrame neutral_frame() {
  SkeletonFrame f;
  f.elbow = {0.3, 0, 0};
  f.wrist = {0.57, 0, 0};
  return f;
}

}  // namespace

TEST_CASE("segment_vectors subtracts positions") {
  SkeletonFrame f;
  f.shoulder = {0.1, 0.2, 0.3};
  f.elbow = {0.4, 0.1, 0.5};
  f.wrist = {0.6, 0.3, 0.4};
  const SegmentVectors s = segment_vectors(f);
  CHECK(distance(s.upper_arm, {0.3, -0.1, 0.2}) < 1e-15);
  CHECK(distance(s.forearm, {0.2, 0.2, -0.1}) < 1e-15);

  const SegmentVectors n = segment_vectors(neutral_frame());
  CHECK(n.upper_arm == Vec3{0.3, 0, 0});
  CHECK(distance(n.forearm, {0.27, 0, 0}) < 1e-15);

  SkeletonFrame d;
  d.shoulder = d.elbow = {1, 1, 1};
  d.wrist = {2, 1, 1};
  CHECK_THROWS_AS(segment_vectors(d), DegenerateSegment);
}

TEST_CASE("theta2 azimuth") {
  CHECK(joint_theta2(seg({1, 0, 0})).angle == 0.0);
  CHECK(joint_theta2(seg({0, 0, 1})).angle == kPi / 2);
  CHECK(joint_theta2(seg({1, -0.5, 1})).angle == kPi / 4);
  const AngleResult v = joint_theta2(seg({0, 1, 0}));
  CHECK(v.angle == 0.0);
  CHECK(v.flag == JointFlag::Indeterminate);
  CHECK(joint_theta2(seg({1, 0, 0})).flag == JointFlag::Ok);
}

TEST_CASE("theta1 elevation") {
  CHECK(joint_theta1(seg({1, 0, 0})) == 0.0);
  CHECK(joint_theta1(seg({0, 1, 0})) == kPi / 2);
  CHECK(joint_theta1(seg({1, 1, 0})) == kPi / 4);
}

TEST_CASE("theta4 elbow") {
  CHECK(joint_theta4(seg({1, 0, 0}, {1, 0, 0})) == kPi);
  CHECK(joint_theta4(seg({1, 0, 0}, {-1, 0, 0})) == 0.0);
  CHECK(joint_theta4(seg({1, 0, 0}, {0, 1, 0})) == kPi / 2);
  // Nearly parallel inputs whose cosine rounds past 1 stay in range.
  const double t = joint_theta4(seg({0.1, 0.2, 0.3}, {0.1 * 3, 0.2 * 3, 0.3 * 3}));
  CHECK(t >= 0.0);
  CHECK(t <= kPi);
}

TEST_CASE("swing_twist cases") {
  const Vec3 x{1, 0, 0};
  const SwingTwist id = swing_twist(Quat::identity(), {0, 0, 1});
  CHECK(id.twist_angle == 0.0);
  CHECK(quat_distance(id.swing, Quat::identity()) == 0.0);

  const SwingTwist pt = swing_twist(Quat::from_axis_angle(x, kPi / 3), x);
  CHECK(pt.twist_angle == doctest::Approx(kPi / 3).epsilon(1e-14));
  CHECK(quat_distance(pt.swing, Quat::identity()) <= 1e-12);

  const Quat sw = Quat::from_axis_angle({0, 1, 0}, kPi / 4);
  const SwingTwist ps = swing_twist(sw, x);
  CHECK(std::abs(ps.twist_angle) <= 1e-12);
  CHECK(quat_distance(ps.swing, sw) <= 1e-12);

  const SwingTwist half = swing_twist(Quat::from_axis_angle({0, 1, 0}, kPi), x);
  CHECK(half.indeterminate);
  CHECK(half.twist_angle == 0.0);
}

TEST_CASE("swing_twist reconstruction property") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Quat q = testutil::random_quat(rng);
    const Vec3 a = testutil::random_unit(rng);
    const SwingTwist st = swing_twist(q, a);
    REQUIRE_FALSE(st.indeterminate);
    CHECK(quat_distance(st.swing * st.twist, q) <= 1e-9);
    CHECK(std::abs(dot(st.swing.vec(), a)) <= 1e-9);
  }
}

TEST_CASE("twist joints") {
  RetargetConfig cfg;
  cfg.neutral_q_upper = Quat::from_axis_angle({0, 1, 0}, 0.4);
  cfg.neutral_q_fore = Quat::from_axis_angle(Vec3{1, 1, 0} / std::sqrt(2.0), -0.3);
  SkeletonFrame f = neutral_frame();
  f.q_upper = cfg.neutral_q_upper;
  f.q_fore = cfg.neutral_q_fore;
  TwistJoints t = twist_joints(f, segment_vectors(f), cfg);
  CHECK(t.theta3.angle == doctest::Approx(0.0));
  CHECK(t.theta5.angle == doctest::Approx(0.0));

  f.q_upper = cfg.neutral_q_upper * Quat::from_axis_angle({1, 0, 0}, kPi / 4);
  f.q_fore = cfg.neutral_q_fore * Quat::from_axis_angle({0, 0, 1}, kPi / 6);
  t = twist_joints(f, segment_vectors(f), cfg);
  CHECK(t.theta3.angle == doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(std::abs(t.theta5.angle) < 1e-12);
}

TEST_CASE("wrist joints") {
  RetargetConfig cfg;
  SkeletonFrame f = neutral_frame();
  f.q_fore = Quat::from_axis_angle({0, 1, 0}, 0.2);
  cfg.neutral_q_hand = Quat::from_axis_angle({1, 0, 0}, 0.1);
  f.q_hand = f.q_fore * cfg.neutral_q_hand;
  WristJoints w = wrist_joints(f, segment_vectors(f), cfg);
  CHECK(std::abs(w.theta6.angle) < 1e-12);
  CHECK(std::abs(w.theta7.angle) < 1e-12);

  cfg = RetargetConfig{};
  f = neutral_frame();
  f.q_hand = Quat::from_axis_angle(cfg.hand_flexion_axis, kPi / 6);
  w = wrist_joints(f, segment_vectors(f), cfg);
  CHECK(w.theta6.angle == doctest::Approx(kPi / 6).epsilon(1e-12));
  CHECK(std::abs(w.theta7.angle) < 1e-12);

  f.q_hand = Quat::from_axis_angle({1, 0, 0}, kPi / 5);
  w = wrist_joints(f, segment_vectors(f), cfg);
  CHECK(std::abs(w.theta6.angle) < 1e-12);
  CHECK(w.theta7.angle == doctest::Approx(kPi / 5).epsilon(1e-12));
}

TEST_CASE("retarget_frame neutral and degenerate") {
  const JointVector j = retarget_frame(neutral_frame(), RetargetConfig{});
  const std::array<double, kDof> expect{0, 0, 0, kPi, 0, 0, 0};
  for (std::size_t i = 0; i < kDof; ++i) CHECK(j.theta[i] == doctest::Approx(expect[i]));
  CHECK(j.theta[3] == kPi);

  SkeletonFrame d = neutral_frame();
  d.elbow = d.shoulder;
  CHECK_THROWS_AS(retarget_frame(d, RetargetConfig{}), DegenerateSegment);
}

TEST_CASE("retarget_frame recovers human_arm_fk parameters") {
  const HumanArmModel model;
  const RetargetConfig cfg;
  const HumanParams p{0.3, 0.5, 0.2, 2.0, 0.1, 0.15, 0.05};
  const JointVector j = retarget_frame(human_arm_fk(model, p, cfg), cfg);
  for (std::size_t i = 0; i < kDof; ++i) CHECK(testutil::angle_diff(j.theta[i], p[i]) < 1e-6);

  std::mt19937_64 rng(21);
  RetargetConfig skewed;
  skewed.neutral_q_upper = testutil::random_quat(rng);
  skewed.neutral_q_fore = testutil::random_quat(rng);
  skewed.neutral_q_hand = testutil::random_quat(rng);
  skewed.hand_flexion_axis = testutil::random_unit(rng);
  for (int k = 0; k < 500; ++k) {
    const HumanParams q = testutil::interior_params(rng);
    const JointVector r = retarget_frame(human_arm_fk(model, q, skewed), skewed);
    for (std::size_t i = 0; i < kDof; ++i) CHECK(testutil::angle_diff(r.theta[i], q[i]) < 1e-6);
  }
}

TEST_CASE("retarget_frame invariances") {
  std::mt19937_64 rng(31);
  const RetargetConfig cfg;
  const HumanArmModel model;
  for (int k = 0; k < 200; ++k) {
    const SkeletonFrame f = human_arm_fk(model, testutil::interior_params(rng), cfg);
    const JointVector base = retarget_frame(f, cfg);

    SkeletonFrame moved = f;
    const Vec3 off{testutil::uniform(rng, -2, 2), testutil::uniform(rng, -2, 2),
                   testutil::uniform(rng, -2, 2)};
    moved.shoulder += off;
    moved.elbow += off;
    moved.wrist += off;
    const JointVector t = retarget_frame(moved, cfg);
    for (std::size_t i = 0; i < kDof; ++i) CHECK(testutil::angle_diff(t.theta[i], base.theta[i]) < 1e-9);

    const double s = testutil::uniform(rng, 0.1, 10.0);
    SkeletonFrame scaled = f;
    scaled.elbow = f.shoulder + (f.elbow - f.shoulder) * s;
    scaled.wrist = f.shoulder + (f.wrist - f.shoulder) * s;
    const JointVector sc = retarget_frame(scaled, cfg);
    for (std::size_t i : {0, 1, 3}) CHECK(testutil::angle_diff(sc.theta[i], base.theta[i]) < 1e-9);

    const double delta = testutil::uniform(rng, -kPi, kPi);
    const Quat r = Quat::from_axis_angle({0, 1, 0}, delta);
    SkeletonFrame rot = f;
    rot.shoulder = r.rotate(f.shoulder);
    rot.elbow = r.rotate(f.elbow);
    rot.wrist = r.rotate(f.wrist);
    rot.q_upper = r * f.q_upper;
    rot.q_fore = r * f.q_fore;
    rot.q_hand = r * f.q_hand;
    const JointVector ro = retarget_frame(rot, cfg);
    CHECK(testutil::angle_diff(ro.theta[0], base.theta[0]) < 1e-9);
    CHECK(testutil::angle_diff(ro.theta[3], base.theta[3]) < 1e-9);
    CHECK(testutil::angle_diff(ro.theta[1], base.theta[1] - delta) < 1e-9);
  }
}

TEST_CASE("retarget_frame is deterministic") {
  std::mt19937_64 rng(41);
  const SkeletonFrame f = human_arm_fk(HumanArmModel{}, testutil::interior_params(rng));
  CHECK(retarget_frame(f, {}) == retarget_frame(f, {}));
}

TEST_CASE("calibration") {
  JointLimits wide;
  wide.lower.fill(-10);
  wide.upper.fill(10);
  wide.max_velocity.fill(1);
  RetargetConfig id;
  id.calibration = {};
  const JointVector raw = JointVector::from({0.1, kPi / 4, 0.3, kPi, 0.5, 0.6, 0.7});
  CHECK(calibrate_joints(raw, id, wide).theta == raw.theta);

  RetargetConfig cfg;
  JointLimits elbow = wide;
  elbow.lower[3] = -3.07;
  elbow.upper[3] = -0.07;
  const JointVector c = calibrate_joints(raw, cfg, elbow);
  CHECK(c.theta[3] == -0.07);
  CHECK(c.flags[3] == JointFlag::Clamped);

  cfg.calibration[1].gain = -1;
  CHECK(calibrate_joints(raw, cfg, wide).theta[1] == -kPi / 4);
  const auto back = uncalibrate(calibrate_joints(raw, cfg, wide).theta, cfg);
  for (std::size_t i = 0; i < kDof; ++i) CHECK(back[i] == doctest::Approx(raw.theta[i]));
}

TEST_CASE("config validation") {
  RetargetConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.calibration[2].gain = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.hand_flexion_axis = {0, 0, 2};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.epsilon = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
