#include "teleop/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "teleop/errors.hpp"

namespace teleop {

namespace {

/// Walks one JSON object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }
  Section(const Section&) = delete;

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [key, _] : j_.items())
      if (!used_.count(key)) throw ConfigError("unknown key " + path_ + "." + key);
  }

  const json* find(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (const json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception& e) {
        throw ConfigError(path_ + "." + key + ": " + e.what());
      }
    }
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Pose read_pose(const json& j, const std::string& path) {
  Section s(j, path);
  Pose p;
  s.read("p", p.position);
  s.read("q", p.orientation);
  return p;
}

json pose_json(const Pose& p) { return {{"p", p.position}, {"q", p.orientation}}; }

std::array<double, kDof> read_joints(const json& j, const std::string& path) {
  const auto v = get_as<std::vector<double>>(j, path);
  if (v.size() != kDof) throw ConfigError(path + " needs " + std::to_string(kDof) + " values");
  std::array<double, kDof> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

void read_robot(const json& j, TeleopConfig& cfg) {
  Section s(j, "robot");
  Pose base = cfg.chain.base;
  Pose tool = cfg.chain.tool;
  if (const json* v = s.find("base")) base = read_pose(*v, "robot.base");
  if (const json* v = s.find("tool")) tool = read_pose(*v, "robot.tool");
  std::size_t elbow = cfg.chain.elbow_link;
  std::size_t wrist = cfg.chain.wrist_link;
  s.read("elbow_link", elbow);
  s.read("wrist_link", wrist);

  const json* dh = s.find("dh_modified");
  const json* joints = s.find("joints");
  if (dh && joints) throw ConfigError("robot: give either dh_modified or joints, not both");
  if (dh) {
    std::vector<ModifiedDhRow> rows;
    for (const auto& row : get_as<std::vector<std::array<double, 3>>>(*dh, "robot.dh_modified"))
      rows.push_back({row[0], row[1], row[2]});
    cfg.chain = KinematicChain::from_modified_dh(rows, base, tool, elbow, wrist);
    return;
  }
  if (joints) {
    if (!joints->is_array()) throw ConfigError("robot.joints must be an array");
    cfg.chain.joints.clear();
    for (std::size_t i = 0; i < joints->size(); ++i) {
      const std::string path = "robot.joints[" + std::to_string(i) + "]";
      Section js((*joints)[i], path);
      JointDescriptor d;
      js.read("axis", d.axis);
      if (const json* v = js.find("pre")) d.pre = read_pose(*v, path + ".pre");
      cfg.chain.joints.push_back(d);
    }
  }
  cfg.chain.base = base;
  cfg.chain.tool = tool;
  cfg.chain.elbow_link = elbow;
  cfg.chain.wrist_link = wrist;
  cfg.chain.ee_link = cfg.chain.joints.size();
}

void read_limits(const json& j, JointLimits& l) {
  Section s(j, "limits");
  if (const json* v = s.find("lower")) l.lower = read_joints(*v, "limits.lower");
  if (const json* v = s.find("upper")) l.upper = read_joints(*v, "limits.upper");
  if (const json* v = s.find("max_velocity")) l.max_velocity = read_joints(*v, "limits.max_velocity");
}

void read_human(const json& j, HumanArmModel& h) {
  Section s(j, "human");
  s.read("shoulder_origin", h.shoulder_origin);
  s.read("upper_length", h.upper_length);
  s.read("fore_length", h.fore_length);
  s.read("hand_length", h.hand_length);
}

void read_retarget(const json& j, RetargetConfig& r) {
  Section s(j, "retarget");
  s.read("neutral_q_upper", r.neutral_q_upper);
  s.read("neutral_q_fore", r.neutral_q_fore);
  s.read("neutral_q_hand", r.neutral_q_hand);
  s.read("hand_flexion_axis", r.hand_flexion_axis);
  s.read("epsilon", r.epsilon);
  if (const json* v = s.find("calibration")) {
    if (!v->is_array() || v->size() != kDof)
      throw ConfigError("retarget.calibration needs " + std::to_string(kDof) + " entries");
    for (std::size_t i = 0; i < kDof; ++i) {
      Section c((*v)[i], "retarget.calibration[" + std::to_string(i) + "]");
      c.read("gain", r.calibration[i].gain);
      c.read("offset", r.calibration[i].offset);
    }
  }
}

void read_controller(const json& j, ControllerConfig& c) {
  Section s(j, "controller");
  s.read("control_rate", c.control_rate);
  s.read("smoothing_alpha", c.smoothing_alpha);
  s.read("hold_on_indeterminate", c.hold_on_indeterminate);
}

}  // namespace

void read_ring_task(const json& j, RingTaskSpec& r) {
  Section s(j, "ring_task");
  s.read("center", r.center);
  s.read("radius", r.radius);
  s.read("target_diameter", r.target_diameter);
  s.read("count", r.count);
  s.read("perpendicular_tolerance", r.perpendicular_tolerance);
  s.read("normal", r.normal);
  s.read("require_in_plane", r.require_in_plane);
}

void read_posture_task(const json& j, PostureTaskSpec& p) {
  Section s(j, "posture_task");
  s.read("tolerance", p.tolerance);
  s.read("order", p.order);
  if (const json* v = s.find("start_posture"))
    p.start_posture = JointVector::from(read_joints(*v, "posture_task.start_posture"));
  if (const json* v = s.find("postures")) {
    if (!v->is_array()) throw ConfigError("posture_task.postures must be an array");
    p.postures.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string path = "posture_task.postures[" + std::to_string(i) + "]";
      Section ps((*v)[i], path);
      PostureGoal g;
      ps.read("label", g.label);
      const json* joints = ps.find("joints");
      if (!joints) throw ConfigError(path + ".joints is required");
      g.joints = JointVector::from(read_joints(*joints, path + ".joints"));
      p.postures.push_back(g);
    }
  }
}

namespace {

void read_operator(const json& j, OperatorConfig& o) {
  Section s(j, "operator");
  s.read("capture_rate", o.capture_rate);
  s.read("goal_duration", o.goal_duration);
  s.read("dwell", o.dwell);
  s.read("max_evaluations", o.max_evaluations);
  s.read("random_starts", o.random_starts);
  s.read("seed", o.seed);
  s.read("tolerance_margin", o.tolerance_margin);
  s.read("velocity_fraction", o.velocity_fraction);
}

void read_service(const json& j, ServiceConfig& c) {
  Section s(j, "service");
  s.read("host", c.host);
  s.read("port", c.port);
  s.read("ws_port", c.ws_port);
  s.read("static_dir", c.static_dir);
  s.read("default_session", c.default_session);
  s.read("max_outbound", c.max_outbound);
}

}  // namespace

TeleopConfig::TeleopConfig() { controller.limits = limits; }

void TeleopConfig::validate() const {
  chain.validate();
  if (chain.joints.size() != kDof)
    throw ConfigError("robot chain must have " + std::to_string(kDof) + " joints");
  limits.validate();
  human.validate();
  retarget.validate();
  controller.validate();
  ring.validate();
  posture.validate(limits);
  op.validate();
  if (service.max_outbound == 0) throw ConfigError("service.max_outbound must be positive");
}

TeleopConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  TeleopConfig cfg;
  {
    Section root(j, "config");
    if (const json* v = root.find("robot")) read_robot(*v, cfg);
    if (const json* v = root.find("limits")) read_limits(*v, cfg.limits);
    if (const json* v = root.find("human")) read_human(*v, cfg.human);
    if (const json* v = root.find("retarget")) read_retarget(*v, cfg.retarget);
    if (const json* v = root.find("controller")) read_controller(*v, cfg.controller);
    if (const json* v = root.find("ring_task")) read_ring_task(*v, cfg.ring);
    if (const json* v = root.find("posture_task")) read_posture_task(*v, cfg.posture);
    if (const json* v = root.find("operator")) read_operator(*v, cfg.op);
    if (const json* v = root.find("service")) read_service(*v, cfg.service);
  }
  cfg.controller.limits = cfg.limits;
  cfg.validate();
  return cfg;
}

TeleopConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

TeleopConfig load_config_with_env(const std::optional<std::filesystem::path>& path) {
  TeleopConfig cfg;
  if (path) {
    cfg = load_config(*path);
  } else if (const char* env = std::getenv("TELEOP_CONFIG"); env && *env) {
    cfg = load_config(env);
  }
  if (const char* env = std::getenv("TELEOP_PORT"); env && *env) {
    char* end = nullptr;
    const long port = std::strtol(env, &end, 10);
    if (*end != '\0' || port < 0 || port > 65535)
      throw ConfigError(std::string("TELEOP_PORT is not a port number: ") + env);
    cfg.service.port = static_cast<std::uint16_t>(port);
  }
  return cfg;
}

json config_to_json(const TeleopConfig& cfg) {
  json j;
  json joints = json::array();
  for (const auto& d : cfg.chain.joints) joints.push_back({{"axis", d.axis}, {"pre", pose_json(d.pre)}});
  j["robot"] = {{"base", pose_json(cfg.chain.base)},
                {"tool", pose_json(cfg.chain.tool)},
                {"joints", joints},
                {"elbow_link", cfg.chain.elbow_link},
                {"wrist_link", cfg.chain.wrist_link}};
  j["limits"] = {{"lower", cfg.limits.lower},
                 {"upper", cfg.limits.upper},
                 {"max_velocity", cfg.limits.max_velocity}};
  j["human"] = {{"shoulder_origin", cfg.human.shoulder_origin},
                {"upper_length", cfg.human.upper_length},
                {"fore_length", cfg.human.fore_length},
                {"hand_length", cfg.human.hand_length}};
  json cal = json::array();
  for (const auto& c : cfg.retarget.calibration) cal.push_back({{"gain", c.gain}, {"offset", c.offset}});
  j["retarget"] = {{"neutral_q_upper", cfg.retarget.neutral_q_upper},
                   {"neutral_q_fore", cfg.retarget.neutral_q_fore},
                   {"neutral_q_hand", cfg.retarget.neutral_q_hand},
                   {"hand_flexion_axis", cfg.retarget.hand_flexion_axis},
                   {"calibration", cal},
                   {"epsilon", cfg.retarget.epsilon}};
  j["controller"] = {{"control_rate", cfg.controller.control_rate},
                     {"smoothing_alpha", cfg.controller.smoothing_alpha},
                     {"hold_on_indeterminate", cfg.controller.hold_on_indeterminate}};
  j["ring_task"] = {{"center", cfg.ring.center},
                    {"radius", cfg.ring.radius},
                    {"target_diameter", cfg.ring.target_diameter},
                    {"count", cfg.ring.count},
                    {"perpendicular_tolerance", cfg.ring.perpendicular_tolerance},
                    {"normal", cfg.ring.normal},
                    {"require_in_plane", cfg.ring.require_in_plane}};
  json postures = json::array();
  for (const auto& p : cfg.posture.postures) postures.push_back({{"label", p.label}, {"joints", p.joints.theta}});
  j["posture_task"] = {{"postures", postures},
                       {"tolerance", cfg.posture.tolerance},
                       {"start_posture", cfg.posture.start_posture.theta},
                       {"order", cfg.posture.order}};
  j["operator"] = {{"capture_rate", cfg.op.capture_rate},
                   {"goal_duration", cfg.op.goal_duration},
                   {"dwell", cfg.op.dwell},
                   {"max_evaluations", cfg.op.max_evaluations},
                   {"random_starts", cfg.op.random_starts},
                   {"seed", cfg.op.seed},
                   {"tolerance_margin", cfg.op.tolerance_margin},
                   {"velocity_fraction", cfg.op.velocity_fraction}};
  j["service"] = {{"host", cfg.service.host},
                  {"port", cfg.service.port},
                  {"ws_port", cfg.service.ws_port},
                  {"static_dir", cfg.service.static_dir},
                  {"default_session", cfg.service.default_session},
                  {"max_outbound", cfg.service.max_outbound}};
  return j;
}

}  // namespace teleop
