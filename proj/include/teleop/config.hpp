#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "teleop/controller.hpp"
#include "teleop/json_io.hpp"
#include "teleop/kinematics.hpp"
#include "teleop/operator.hpp"
#include "teleop/retarget.hpp"
#include "teleop/task.hpp"

namespace teleop {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 9870;     // newline-delimited JSON over TCP
  std::uint16_t ws_port = 9871;  // WebSocket + static files
  std::string static_dir = "web";
  std::string default_session = "default";
  /// Per-connection limit on queued outbound messages; the oldest are dropped beyond it.
  std::size_t max_outbound = 4096;
};

struct TeleopConfig {
  KinematicChain chain = default_robot_chain();
  JointLimits limits = default_robot_limits();
  HumanArmModel human;
  RetargetConfig retarget;
  ControllerConfig controller;  // limits mirror `limits`
  RingTaskSpec ring;
  PostureTaskSpec posture = default_posture_spec();
  OperatorConfig op;
  ServiceConfig service;

  TeleopConfig();
  /// Throws ConfigError.
  void validate() const;
};

/// Reads JSON with comments. Sections may be partial; missing keys keep their defaults,
/// unknown keys are rejected. Throws ConfigError.
TeleopConfig parse_config(std::string_view text);
TeleopConfig load_config(const std::filesystem::path& path);

/// Config from `path`, else $TELEOP_CONFIG, else defaults; then $TELEOP_PORT overrides the
/// service port.
TeleopConfig load_config_with_env(const std::optional<std::filesystem::path>& path);

/// Apply a (partial) ring_task / posture_task section onto `spec`. Throws ConfigError.
void read_ring_task(const json& j, RingTaskSpec& spec);
void read_posture_task(const json& j, PostureTaskSpec& spec);

/// Full config as JSON (same layout parse_config reads).
json config_to_json(const TeleopConfig& cfg);

}  // namespace teleop
