#pragma once

#include <array>
#include <string>

#include "json.hpp"
#include "teleop/geometry.hpp"
#include "teleop/joints.hpp"

namespace teleop {

using json = nlohmann::json;

void to_json(json& j, const Vec3& v);
void from_json(const json& j, Vec3& v);
/// Quaternions are [w, x, y, z].
void to_json(json& j, const Quat& q);
void from_json(const json& j, Quat& q);

json flags_to_json(const std::array<JointFlag, kDof>& flags);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace teleop
