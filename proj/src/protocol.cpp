#include "teleop/protocol.hpp"

#include "teleop/errors.hpp"

namespace teleop {

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::None: return "none";
    case Condition::HH: return "HH";
    case Condition::HV: return "HV";
    case Condition::RH: return "RH";
  }
  return "none";
}

std::optional<Condition> parse_condition(std::string_view s) {
  if (s == "none") return Condition::None;
  if (s == "HH") return Condition::HH;
  if (s == "HV") return Condition::HV;
  if (s == "RH") return Condition::RH;
  return std::nullopt;
}

std::string_view to_string(Topic t) {
  switch (t) {
    case Topic::JointState: return "joint_state";
    case Topic::Poses: return "poses";
    case Topic::Task: return "task";
  }
  return "task";
}

std::optional<Topic> parse_topic(std::string_view s) {
  for (Topic t : kAllTopics)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

namespace {

[[noreturn]] void bad(const std::string& detail) { throw ProtocolError("bad_message", detail); }

const json& require(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) bad(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

ClientMsg parse_client_message(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) bad("message is not valid JSON");
  return client_message_from_json(j);
}

ClientMsg client_message_from_json(const json& j) {
  if (!j.is_object()) bad("message must be a JSON object");
  ClientMsg m;
  if (const auto it = j.find("seq"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) bad("field 'seq' must be an integer");
    m.seq = it->get<std::int64_t>();
  }
  const std::string type = require_string(j, "type");

  if (type == "frame") {
    try {
      m.body = FrameMsg{frame_from_json(require(j, "data"))};
    } catch (const ParseError& e) {
      bad("frame: " + e.reason());
    }
  } else if (type == "start_task") {
    StartTaskMsg s;
    const auto kind = parse_task_kind(require_string(j, "kind"));
    if (!kind) bad("unknown task kind");
    s.kind = *kind;
    if (const auto it = j.find("overrides"); it != j.end() && !it->is_null()) {
      if (!it->is_object()) bad("field 'overrides' must be an object");
      s.overrides = *it;
    }
    m.body = s;
  } else if (type == "reset") {
    m.body = ResetMsg{};
  } else if (type == "set_condition") {
    const auto c = parse_condition(require_string(j, "value"));
    if (!c) bad("condition must be one of HH, HV, RH, none");
    m.body = SetConditionMsg{*c};
  } else if (type == "subscribe") {
    SubscribeMsg s;
    const json& topics = require(j, "topics");
    if (!topics.is_array()) bad("field 'topics' must be an array");
    for (const auto& t : topics) {
      if (!t.is_string()) bad("topic names must be strings");
      const auto topic = parse_topic(t.get<std::string>());
      if (!topic) bad("unknown topic '" + t.get<std::string>() + "'");
      s.topics.push_back(*topic);
    }
    if (const auto it = j.find("session"); it != j.end() && !it->is_null()) {
      if (!it->is_string() || it->get<std::string>().empty()) bad("field 'session' must be a non-empty string");
      s.session = it->get<std::string>();
    }
    m.body = s;
  } else {
    bad("unknown message type '" + type + "'");
  }
  return m;
}

json client_message_to_json(const ClientMsg& m) {
  json j = std::visit(
      [](const auto& b) -> json {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, FrameMsg>) {
          return {{"type", "frame"}, {"data", frame_to_json(b.frame)}};
        } else if constexpr (std::is_same_v<T, StartTaskMsg>) {
          return {{"type", "start_task"}, {"kind", to_string(b.kind)}, {"overrides", b.overrides}};
        } else if constexpr (std::is_same_v<T, ResetMsg>) {
          return {{"type", "reset"}};
        } else if constexpr (std::is_same_v<T, SetConditionMsg>) {
          return {{"type", "set_condition"}, {"value", to_string(b.value)}};
        } else {
          json topics = json::array();
          for (Topic t : b.topics) topics.push_back(to_string(t));
          json out = {{"type", "subscribe"}, {"topics", topics}};
          if (b.session) out["session"] = *b.session;
          return out;
        }
      },
      m.body);
  if (m.seq) j["seq"] = *m.seq;
  return j;
}

std::optional<Topic> topic_of(const json& msg) {
  const std::string type = msg.value("type", "");
  if (type == "joint_state") return Topic::JointState;
  if (type == "poses") return Topic::Poses;
  if (type == "task_event" || type == "task_state") return Topic::Task;
  return std::nullopt;
}

json make_ack(std::uint64_t seq, std::optional<std::int64_t> ref) {
  json j = {{"type", "ack"}, {"seq", seq}};
  j["ref"] = ref ? json(*ref) : json(nullptr);
  return j;
}

json make_error(std::string_view code, std::string_view detail) {
  return {{"type", "error"}, {"code", code}, {"detail", detail}};
}

}  // namespace teleop
