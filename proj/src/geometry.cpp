#include "teleop/geometry.hpp"

#include <algorithm>

namespace teleop {

Quat Quat::from_axis_angle(const Vec3& unit_axis, double angle) {
  const double h = 0.5 * angle;
  const double s = std::sin(h);
  return {std::cos(h), unit_axis.x * s, unit_axis.y * s, unit_axis.z * s};
}

Quat Quat::normalized() const {
  const double n = norm();
  return {w / n, x / n, y / n, z / n};
}

Quat Quat::canonical() const {
  if (w < 0.0) return {-w, -x, -y, -z};
  return *this;
}

Quat Quat::operator*(const Quat& o) const {
  return {w * o.w - x * o.x - y * o.y - z * o.z,
          w * o.x + x * o.w + y * o.z - z * o.y,
          w * o.y - x * o.z + y * o.w + z * o.x,
          w * o.z + x * o.y - y * o.x + z * o.w};
}

Vec3 Quat::rotate(const Vec3& v) const {
  const Vec3 u = vec();
  const Vec3 t = 2.0 * cross(u, v);
  return v + w * t + cross(u, t);
}

double quat_distance(const Quat& a, const Quat& b) {
  const double dm = std::sqrt((a.w - b.w) * (a.w - b.w) + (a.x - b.x) * (a.x - b.x) +
                              (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
  const double dp = std::sqrt((a.w + b.w) * (a.w + b.w) + (a.x + b.x) * (a.x + b.x) +
                              (a.y + b.y) * (a.y + b.y) + (a.z + b.z) * (a.z + b.z));
  return std::min(dm, dp);
}

double rotation_angle(const Quat& q) {
  const Quat c = q.canonical();
  return 2.0 * std::atan2(norm(c.vec()), c.w);
}

Quat rotation_between(const Vec3& from, const Vec3& to) {
  const double c = dot(from, to);
  if (c < -1.0 + 1e-12) {
    // Antiparallel: any axis orthogonal to `from` works.
    Vec3 ortho = cross(from, Vec3{1.0, 0.0, 0.0});
    if (norm(ortho) < 1e-6) ortho = cross(from, Vec3{0.0, 1.0, 0.0});
    return Quat::from_axis_angle(normalized(ortho), kPi);
  }
  const Vec3 axis = cross(from, to);
  return Quat{1.0 + c, axis.x, axis.y, axis.z}.normalized();
}

Quat slerp(const Quat& a, const Quat& b, double t) {
  if (t <= 0.0) return a;
  if (t >= 1.0) return b;
  double d = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  Quat end = b;
  if (d < 0.0) {
    d = -d;
    end = {-b.w, -b.x, -b.y, -b.z};
  }
  double wa = 1.0 - t;
  double wb = t;
  if (d < 0.9995) {
    const double theta = std::acos(std::clamp(d, -1.0, 1.0));
    const double s = std::sin(theta);
    wa = std::sin((1.0 - t) * theta) / s;
    wb = std::sin(t * theta) / s;
  }
  return Quat{wa * a.w + wb * end.w, wa * a.x + wb * end.x, wa * a.y + wb * end.y,
              wa * a.z + wb * end.z}
      .normalized();
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace teleop
