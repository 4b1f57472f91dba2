#pragma once

#include <cmath>
#include <numbers>

namespace teleop {

inline constexpr double kPi = std::numbers::pi;

/// Cartesian vector. Positions are metres in the y-up task frame.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

/// Unit vector along `v`; the caller guarantees a non-zero norm.
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Rotation quaternion (w, x, y, z). Hamilton convention, `a * b` applies b first.
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quat identity() { return {}; }
  static Quat from_axis_angle(const Vec3& unit_axis, double angle);

  constexpr Vec3 vec() const { return {x, y, z}; }
  constexpr Quat conjugate() const { return {w, -x, -y, -z}; }
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Quat normalized() const;
  /// Same rotation with w >= 0.
  Quat canonical() const;

  Quat operator*(const Quat& o) const;
  Vec3 rotate(const Vec3& v) const;

  constexpr bool operator==(const Quat&) const = default;
};

inline Quat inverse(const Quat& q) { return q.conjugate(); }

/// Distance between two rotations in quaternion space, insensitive to the q/-q double cover.
double quat_distance(const Quat& a, const Quat& b);

/// Rotation angle in [0, pi].
double rotation_angle(const Quat& q);

/// Shortest-arc rotation taking unit vector `from` onto unit vector `to`.
Quat rotation_between(const Vec3& from, const Vec3& to);

/// Shortest-arc spherical interpolation; t = 0 and t = 1 return the endpoints exactly.
Quat slerp(const Quat& a, const Quat& b, double t);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Rigid transform: rotate, then translate.
struct Pose {
  Vec3 position;
  Quat orientation;

  Pose operator*(const Pose& o) const {
    return {position + orientation.rotate(o.position), orientation * o.orientation};
  }
  Vec3 transform(const Vec3& p) const { return position + orientation.rotate(p); }
  Pose inverse() const {
    const Quat inv = orientation.conjugate();
    return {inv.rotate(-position), inv};
  }
};

}  // namespace teleop
