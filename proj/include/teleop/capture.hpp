#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "teleop/json_io.hpp"
#include "teleop/retarget.hpp"

namespace teleop {

/// Interchange record for one capture; the flattened form of SkeletonFrame.
using FrameRecord = SkeletonFrame;

/// Column / key names, in file order.
inline constexpr std::array<std::string_view, 22> kFrameFields = {
    "t",   "sx",  "sy",  "sz",  "ex",  "ey",  "ez",  "wx",  "wy",  "wz",  "quw",
    "qux", "quy", "quz", "qfw", "qfx", "qfy", "qfz", "qhw", "qhx", "qhy", "qhz"};

enum class FrameFormat { Csv, Jsonl };
std::optional<FrameFormat> parse_frame_format(std::string_view s);
/// Guess from the file extension (".csv" -> Csv, otherwise Jsonl).
FrameFormat frame_format_for_path(std::string_view path);

struct RecordingMeta {
  double capture_rate = 120.0;  // Hz
  std::optional<double> upper_length;
  std::optional<double> fore_length;
  std::string convention = "y_up";

  bool operator==(const RecordingMeta&) const = default;
};

struct ParseOptions {
  /// Strict: a decreasing timestamp is a ParseError. Lenient: the record is dropped.
  bool strict = true;
};

struct ParsedFrames {
  std::vector<FrameRecord> frames;
  RecordingMeta meta;
  std::vector<std::size_t> dropped_lines;
};

/// Reads frames. CSV starts with an optional "# meta {json}" line and a header naming all
/// fields; JSONL may start with a {"meta": {...}} record. Quaternions within [0.99, 1.01]
/// of unit norm are re-normalized, others rejected with NormError.
ParsedFrames parse_frames(std::string_view text, FrameFormat format, const ParseOptions& opts = {});

/// Writes frames so that parse_frames reproduces them bit for bit.
std::string write_frames(const std::vector<FrameRecord>& frames, FrameFormat format,
                         const std::optional<RecordingMeta>& meta = std::nullopt);

/// One record as a JSON object keyed by kFrameFields; checks fields and quaternion norms
/// like parse_frames does (`line` is used in the errors).
FrameRecord frame_from_json(const json& j, std::size_t line = 0);
json frame_to_json(const FrameRecord& f);

/// Field value by name (see kFrameFields).
double frame_field(const FrameRecord& f, std::size_t field_index);

/// Re-times frames onto t0 + k / target_rate: positions linearly, orientations by
/// shortest-arc slerp. Throws InsufficientData for fewer than two frames.
std::vector<FrameRecord> resample_frames(const std::vector<FrameRecord>& frames, double target_rate);

/// s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5. Throws DomainError outside [0, 1].
double minimum_jerk(double tau);

}  // namespace teleop
