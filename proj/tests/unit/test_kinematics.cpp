#include <Eigen/Geometry>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "teleop/errors.hpp"
#include "teleop/kinematics.hpp"

using namespace teleop;

namespace {

// Homogeneous-matrix oracle: Craig's modified DH, T_i = Rx(alpha) Tx(a) Rz(theta) Tz(d).
struct DhOracle {
  static Eigen::Matrix4d rot_x(double a) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.block<3, 3>(0, 0) = Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix();
    return m;
  }
  static Eigen::Matrix4d rot_z(double a) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.block<3, 3>(0, 0) = Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    return m;
  }
  static Eigen::Matrix4d trans(double x, double y, double z) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.block<3, 1>(0, 3) = Eigen::Vector3d(x, y, z);
    return m;
  }

  // Published FR3 / Panda table: a_{i-1}, d_i, alpha_{i-1}.
  static constexpr double rows[7][3] = {
      {0, 0.333, 0},       {0, 0, -kPi / 2},          {0, 0.316, kPi / 2}, {0.0825, 0, kPi / 2},
      {-0.0825, 0.384, -kPi / 2}, {0, 0, kPi / 2}, {0.088, 0, kPi / 2}};

  static std::vector<Eigen::Matrix4d> frames(const std::array<double, 7>& q) {
    // Columns: images of DH x, y, z in the y-up task frame.
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    t.block<3, 3>(0, 0) << 0, 1, 0, 0, 0, 1, 1, 0, 0;
    std::vector<Eigen::Matrix4d> out;
    for (int i = 0; i < 7; ++i) {
      t = t * rot_x(rows[i][2]) * trans(rows[i][0], 0, 0) * rot_z(q[i]) * trans(0, 0, rows[i][1]);
      out.push_back(t);
    }
    out.push_back(t * trans(0, 0, 0.107 + 0.1034));
    return out;
  }
};

double gap(const Vec3& p, const Eigen::Matrix4d& m) {
  return (Eigen::Vector3d(p.x, p.y, p.z) - m.block<3, 1>(0, 3)).norm();
}

Eigen::Matrix3d rotation_matrix(const Quat& q) {
  return Eigen::Quaterniond(q.w, q.x, q.y, q.z).toRotationMatrix();
}

}  // namespace

TEST_CASE("default chain matches the matrix oracle") {
  const KinematicChain chain = default_robot_chain();
  const auto zero = forward_kinematics(chain, JointVector{});
  const auto ref = DhOracle::frames({});
  REQUIRE(zero.size() == 8);
  for (std::size_t i = 0; i < zero.size(); ++i) CHECK(gap(zero[i].position, ref[i]) < 1e-12);
  // Frozen from the oracle: flange 0.107 plus hand 0.1034 below the 1.033 column top.
  CHECK(zero.back().position.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(zero.back().position.y == doctest::Approx(0.8226).epsilon(1e-12));
  CHECK(zero.back().position.z == doctest::Approx(0.088).epsilon(1e-12));

  std::mt19937_64 rng(51);
  for (int k = 0; k < 300; ++k) {
    std::array<double, 7> q{};
    for (double& v : q) v = testutil::uniform(rng, -kPi, kPi);
    const auto got = forward_kinematics(chain, JointVector::from(q));
    const auto want = DhOracle::frames(q);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(gap(got[i].position, want[i]) < 1e-12);
      CHECK((rotation_matrix(got[i].orientation) - want[i].block<3, 3>(0, 0)).norm() < 1e-12);
      CHECK(rotation_matrix(got[i].orientation).determinant() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("zero angles give cumulative fixed transforms") {
  const KinematicChain chain = default_robot_chain();
  const auto poses = forward_kinematics(chain, JointVector{});
  Pose acc = chain.base;
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    acc = acc * chain.joints[i].pre;
    CHECK(distance(poses[i].position, acc.position) < 1e-15);
  }
  const ElbowWrist ew = robot_elbow_wrist(chain, JointVector{});
  CHECK(ew.elbow == poses[3].position);
  CHECK(ew.wrist == poses[5].position);
}

TEST_CASE("single joint half turn") {
  KinematicChain chain;
  chain.joints.push_back({{0, 1, 0}, {}});
  chain.tool = {{1, 0, 0}, {}};
  chain.ee_link = 1;
  chain.elbow_link = chain.wrist_link = 1;
  const std::vector<double> q{kPi};
  const auto poses = forward_kinematics(chain, q);
  CHECK(distance(poses.back().position, {-1, 0, 0}) < 1e-15);
  const std::vector<double> bad{0.0, 0.0};
  CHECK_THROWS_AS(forward_kinematics(chain, bad), DimensionMismatch);
}

TEST_CASE("elbow aliasing the end-effector") {
  KinematicChain chain = default_robot_chain();
  chain.elbow_link = chain.wrist_link = chain.ee_link;
  const JointVector q = JointVector::from({0.1, 0.2, 0.3, -1.0, 0.5, 1.0, 0.7});
  const ElbowWrist ew = robot_elbow_wrist(chain, q);
  CHECK(ew.elbow == forward_kinematics(chain, q).back().position);
}

TEST_CASE("elbow fixed while theta4 moves") {
  const KinematicChain chain = default_robot_chain();
  JointVector q = JointVector::from({0.3, -0.4, 0.2, -1.0, 0.5, 1.2, 0.1});
  const ElbowWrist first = robot_elbow_wrist(chain, q);
  for (double t4 = -3.0; t4 < -0.1; t4 += 0.25) {
    q.theta[3] = t4;
    const ElbowWrist ew = robot_elbow_wrist(chain, q);
    CHECK(distance(ew.elbow, first.elbow) < 1e-12);
    if (std::abs(t4 + 1.0) > 0.1) CHECK(distance(ew.wrist, first.wrist) > 1e-3);
  }
}

TEST_CASE("link lengths and base equivariance") {
  const KinematicChain chain = default_robot_chain();
  std::mt19937_64 rng(52);
  const auto zero = forward_kinematics(chain, JointVector{});
  KinematicChain moved = chain;
  const Pose shift{{0.4, -1.0, 2.0}, testutil::random_quat(rng)};
  moved.base = shift * chain.base;
  for (int k = 0; k < 200; ++k) {
    std::array<double, 7> q{};
    for (double& v : q) v = testutil::uniform(rng, -kPi, kPi);
    const auto poses = forward_kinematics(chain, JointVector::from(q));
    for (std::size_t i = 1; i < poses.size(); ++i) {
      CHECK(distance(poses[i].position, poses[i - 1].position) ==
            doctest::Approx(distance(zero[i].position, zero[i - 1].position)).epsilon(1e-12));
    }
    const auto other = forward_kinematics(moved, JointVector::from(q));
    for (std::size_t i = 0; i < poses.size(); ++i) {
      const Pose expect = shift * poses[i];
      CHECK(distance(other[i].position, expect.position) < 1e-12);
      CHECK(quat_distance(other[i].orientation, expect.orientation) < 1e-12);
    }
  }
}

TEST_CASE("chain validation") {
  KinematicChain c = default_robot_chain();
  CHECK_NOTHROW(c.validate());
  c.elbow_link = 6;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = default_robot_chain();
  c.joints[0].axis = {0, 0, 2};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(KinematicChain{}.validate(), ConfigError);
}

TEST_CASE("human arm model") {
  HumanArmModel m;
  m.shoulder_origin = {0.1, 1.4, -0.2};
  SkeletonFrame f = human_arm_fk(m, {0, 0, 0, kPi, 0, 0, 0});
  CHECK(distance(f.elbow, m.shoulder_origin + Vec3{m.upper_length, 0, 0}) < 1e-15);
  CHECK(distance(f.wrist, m.shoulder_origin + Vec3{m.upper_length + m.fore_length, 0, 0}) < 1e-15);

  f = human_arm_fk(m, {kPi / 2, 0, 0, kPi, 0, 0, 0});
  CHECK(distance(f.elbow, m.shoulder_origin + Vec3{0, m.upper_length, 0}) < 1e-15);

  std::mt19937_64 rng(53);
  for (int k = 0; k < 500; ++k) {
    HumanParams p{};
    for (double& v : p) v = testutil::uniform(rng, -4, 4);
    f = human_arm_fk(m, p);
    CHECK(distance(f.elbow, f.shoulder) == doctest::Approx(m.upper_length).epsilon(1e-12));
    CHECK(distance(f.wrist, f.elbow) == doctest::Approx(m.fore_length).epsilon(1e-12));
    const Vec3 dir = (f.elbow - f.shoulder) / m.upper_length;
    CHECK(distance(dir, {std::cos(p[0]) * std::cos(p[1]), std::sin(p[0]),
                         std::cos(p[0]) * std::sin(p[1])}) < 1e-12);
  }
}
