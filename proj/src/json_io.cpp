#include "teleop/json_io.hpp"

#include <charconv>
#include <stdexcept>

namespace teleop {

void to_json(json& j, const Vec3& v) { j = json::array({v.x, v.y, v.z}); }

void from_json(const json& j, Vec3& v) {
  if (!j.is_array() || j.size() != 3) throw json::type_error::create(302, "expected [x, y, z]", &j);
  v = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(json& j, const Quat& q) { j = json::array({q.w, q.x, q.y, q.z}); }

void from_json(const json& j, Quat& q) {
  if (!j.is_array() || j.size() != 4)
    throw json::type_error::create(302, "expected [w, x, y, z]", &j);
  q = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json flags_to_json(const std::array<JointFlag, kDof>& flags) {
  json a = json::array();
  for (JointFlag f : flags) a.push_back(std::string(to_string(f)));
  return a;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("cannot format double");
  return std::string(buf, res.ptr);
}

}  // namespace teleop
