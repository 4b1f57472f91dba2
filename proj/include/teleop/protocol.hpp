#pragma once

// Wire messages. Every message is one JSON object with a "type" field; on TCP each is
// terminated by a newline, on WebSocket each is one text frame.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "teleop/capture.hpp"
#include "teleop/json_io.hpp"
#include "teleop/task.hpp"

namespace teleop {

enum class Condition { None, HH, HV, RH };
std::string_view to_string(Condition c);
std::optional<Condition> parse_condition(std::string_view s);

enum class Topic { JointState, Poses, Task };
std::string_view to_string(Topic t);
std::optional<Topic> parse_topic(std::string_view s);
inline constexpr Topic kAllTopics[] = {Topic::JointState, Topic::Poses, Topic::Task};

struct FrameMsg {
  FrameRecord frame;
};
struct StartTaskMsg {
  TaskKind kind = TaskKind::Ring;
  json overrides = json::object();  // ring_task / posture_task keys
};
struct ResetMsg {};
struct SetConditionMsg {
  Condition value = Condition::None;
};
struct SubscribeMsg {
  std::vector<Topic> topics;
  std::optional<std::string> session;
};

using ClientBody = std::variant<FrameMsg, StartTaskMsg, ResetMsg, SetConditionMsg, SubscribeMsg>;

struct ClientMsg {
  std::optional<std::int64_t> seq;
  ClientBody body;
};

/// Rejected client message; `code` is "bad_message".
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& detail)
      : std::runtime_error(detail), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

ClientMsg parse_client_message(std::string_view text);
ClientMsg client_message_from_json(const json& j);
json client_message_to_json(const ClientMsg& m);

/// Topic a server message is broadcast on; nullopt for ack and error, which go only to
/// the client concerned.
std::optional<Topic> topic_of(const json& server_msg);

json make_ack(std::uint64_t seq, std::optional<std::int64_t> ref);
json make_error(std::string_view code, std::string_view detail);

}  // namespace teleop
