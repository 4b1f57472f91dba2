#pragma once

#include <cmath>
#include <random>

#include "teleop/geometry.hpp"
#include "teleop/kinematics.hpp"

namespace testutil {

using teleop::HumanParams;
using teleop::kPi;
using teleop::Quat;
using teleop::Vec3;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v{n(rng), n(rng), n(rng)};
  return v / teleop::norm(v);
}

inline Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Quat{n(rng), n(rng), n(rng), n(rng)}.normalized();
}

/// Parameters away from the retargeting singularities.
inline HumanParams interior_params(std::mt19937_64& rng) {
  const double m = 0.1;
  return {uniform(rng, -kPi / 2 + m, kPi / 2 - m), uniform(rng, -kPi + m, kPi - m),
          uniform(rng, -kPi + m, kPi - m),         uniform(rng, m, kPi - m),
          uniform(rng, -kPi + m, kPi - m),         uniform(rng, -kPi + m, kPi - m),
          uniform(rng, -kPi + m, kPi - m)};
}

inline double angle_diff(double a, double b) { return std::abs(teleop::wrap_angle(a - b)); }

}  // namespace testutil
