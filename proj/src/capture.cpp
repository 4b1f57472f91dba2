#include "teleop/capture.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "teleop/errors.hpp"
#include "teleop/json_io.hpp"

namespace teleop {

namespace {

double& field_ref(FrameRecord& f, std::size_t i) {
  switch (i) {
    case 0: return f.timestamp;
    case 1: return f.shoulder.x;
    case 2: return f.shoulder.y;
    case 3: return f.shoulder.z;
    case 4: return f.elbow.x;
    case 5: return f.elbow.y;
    case 6: return f.elbow.z;
    case 7: return f.wrist.x;
    case 8: return f.wrist.y;
    case 9: return f.wrist.z;
    case 10: return f.q_upper.w;
    case 11: return f.q_upper.x;
    case 12: return f.q_upper.y;
    case 13: return f.q_upper.z;
    case 14: return f.q_fore.w;
    case 15: return f.q_fore.x;
    case 16: return f.q_fore.y;
    case 17: return f.q_fore.z;
    case 18: return f.q_hand.w;
    case 19: return f.q_hand.x;
    case 20: return f.q_hand.y;
    case 21: return f.q_hand.z;
  }
  throw DimensionMismatch("frame field index out of range");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

RecordingMeta meta_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, 0, "meta must be an object");
  RecordingMeta m;
  try {
    if (j.contains("capture_rate")) m.capture_rate = j.at("capture_rate").get<double>();
    if (j.contains("upper_length")) m.upper_length = j.at("upper_length").get<double>();
    if (j.contains("fore_length")) m.fore_length = j.at("fore_length").get<double>();
    if (j.contains("convention")) m.convention = j.at("convention").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(line, 0, std::string("bad meta: ") + e.what());
  }
  if (!(std::isfinite(m.capture_rate) && m.capture_rate > 0.0))
    throw ParseError(line, 0, "capture_rate must be positive");
  return m;
}

json meta_to_json(const RecordingMeta& m) {
  json j = json::object();
  j["capture_rate"] = m.capture_rate;
  if (m.upper_length) j["upper_length"] = *m.upper_length;
  if (m.fore_length) j["fore_length"] = *m.fore_length;
  j["convention"] = m.convention;
  return j;
}

void check_quat(Quat& q, std::size_t line, const char* field) {
  const double n = q.norm();
  if (!(n >= 0.99 && n <= 1.01)) throw NormError(line, field, n);
  // Leave already-unit values untouched so that written files read back bit for bit.
  if (std::abs(n - 1.0) > 1e-12) q = {q.w / n, q.x / n, q.y / n, q.z / n};
}

void finish_record(FrameRecord& f, std::size_t line) {
  for (std::size_t i = 0; i < kFrameFields.size(); ++i)
    if (!std::isfinite(field_ref(f, i)))
      throw ParseError(line, i + 1, "non-finite value for '" + std::string(kFrameFields[i]) + "'");
  check_quat(f.q_upper, line, "qu");
  check_quat(f.q_fore, line, "qf");
  check_quat(f.q_hand, line, "qh");
}

/// Appends unless the timestamp goes backwards.
void accept(ParsedFrames& out, FrameRecord&& f, std::size_t line, const ParseOptions& opts) {
  if (!out.frames.empty() && f.timestamp < out.frames.back().timestamp) {
    if (opts.strict) throw ParseError(line, 1, "timestamp decreases");
    out.dropped_lines.push_back(line);
    return;
  }
  out.frames.push_back(std::move(f));
}

ParsedFrames parse_csv(std::string_view text, const ParseOptions& opts) {
  ParsedFrames out;
  const auto lines = split_lines(text);
  std::vector<std::size_t> column_of(kFrameFields.size(), 0);
  std::size_t columns = 0;
  bool have_header = false;

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    const std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view rest = trim(line.substr(1));
      if (!have_header && rest.substr(0, 4) == "meta") {
        const json j = json::parse(rest.substr(4), nullptr, false);
        if (j.is_discarded()) throw ParseError(line_no, 0, "meta is not valid JSON");
        out.meta = meta_from_json(j, line_no);
      }
      continue;
    }

    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }

    if (!have_header) {
      for (std::size_t f = 0; f < kFrameFields.size(); ++f) {
        std::size_t found = 0;
        for (std::size_t c = 0; c < cells.size(); ++c)
          if (cells[c] == kFrameFields[f]) found = c + 1;
        if (!found) throw SchemaError(line_no, std::string(kFrameFields[f]));
        column_of[f] = found - 1;
      }
      columns = cells.size();
      have_header = true;
      continue;
    }

    FrameRecord rec;
    for (std::size_t f = 0; f < kFrameFields.size(); ++f) {
      const std::size_t c = column_of[f];
      if (c >= cells.size() || cells[c].empty())
        throw SchemaError(line_no, std::string(kFrameFields[f]));
      const std::string_view cell = cells[c];
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw ParseError(line_no, c + 1, "not a number: '" + std::string(cell) + "'");
      field_ref(rec, f) = v;
    }
    if (cells.size() > columns) throw ParseError(line_no, columns + 1, "too many columns");
    finish_record(rec, line_no);
    accept(out, std::move(rec), line_no, opts);
  }
  if (!have_header) throw SchemaError(lines.empty() ? 1 : lines.size(), "t");
  return out;
}

ParsedFrames parse_jsonl(std::string_view text, const ParseOptions& opts) {
  ParsedFrames out;
  const auto lines = split_lines(text);
  bool seen_record = false;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    const std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(line_no, 0, "invalid JSON");
    if (!j.is_object()) throw ParseError(line_no, 0, "expected a JSON object");
    if (j.contains("meta")) {
      if (seen_record) throw ParseError(line_no, 0, "meta record after frames");
      out.meta = meta_from_json(j["meta"], line_no);
      continue;
    }
    seen_record = true;
    accept(out, frame_from_json(j, line_no), line_no, opts);
  }
  return out;
}

Vec3 lerp(const Vec3& a, const Vec3& b, double u) { return a + (b - a) * u; }

}  // namespace

std::optional<FrameFormat> parse_frame_format(std::string_view s) {
  if (s == "csv") return FrameFormat::Csv;
  if (s == "jsonl") return FrameFormat::Jsonl;
  return std::nullopt;
}

FrameFormat frame_format_for_path(std::string_view path) {
  const auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() && path.substr(path.size() - suffix.size()) == suffix;
  };
  return ends_with(".csv") || ends_with(".CSV") ? FrameFormat::Csv : FrameFormat::Jsonl;
}

FrameRecord frame_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, 0, "expected a JSON object");
  FrameRecord rec;
  for (std::size_t f = 0; f < kFrameFields.size(); ++f) {
    const std::string key(kFrameFields[f]);
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) throw SchemaError(line, key);
    if (!it->is_number()) throw ParseError(line, 0, "field '" + key + "' is not a number");
    field_ref(rec, f) = it->get<double>();
  }
  finish_record(rec, line);
  return rec;
}

json frame_to_json(const FrameRecord& f) {
  json j = json::object();
  for (std::size_t i = 0; i < kFrameFields.size(); ++i) j[std::string(kFrameFields[i])] = frame_field(f, i);
  return j;
}

double frame_field(const FrameRecord& f, std::size_t field_index) {
  return field_ref(const_cast<FrameRecord&>(f), field_index);
}

ParsedFrames parse_frames(std::string_view text, FrameFormat format, const ParseOptions& opts) {
  return format == FrameFormat::Csv ? parse_csv(text, opts) : parse_jsonl(text, opts);
}

std::string write_frames(const std::vector<FrameRecord>& frames, FrameFormat format,
                         const std::optional<RecordingMeta>& meta) {
  std::string out;
  if (format == FrameFormat::Csv) {
    if (meta) out += "# meta " + meta_to_json(*meta).dump() + "\n";
    for (std::size_t i = 0; i < kFrameFields.size(); ++i) {
      if (i) out += ',';
      out += kFrameFields[i];
    }
    out += '\n';
    for (const auto& f : frames) {
      for (std::size_t i = 0; i < kFrameFields.size(); ++i) {
        if (i) out += ',';
        out += format_double(frame_field(f, i));
      }
      out += '\n';
    }
    return out;
  }
  if (meta) out += json{{"meta", meta_to_json(*meta)}}.dump() + "\n";
  for (const auto& f : frames) {
    // Written by hand to keep field order stable.
    out += '{';
    for (std::size_t i = 0; i < kFrameFields.size(); ++i) {
      if (i) out += ',';
      out += '"';
      out += kFrameFields[i];
      out += "\":";
      out += format_double(frame_field(f, i));
    }
    out += "}\n";
  }
  return out;
}

std::vector<FrameRecord> resample_frames(const std::vector<FrameRecord>& frames,
                                         double target_rate) {
  if (frames.size() < 2) throw InsufficientData("resampling needs at least two frames");
  if (!(std::isfinite(target_rate) && target_rate > 0.0))
    throw DomainError("target rate must be positive");
  const double t0 = frames.front().timestamp;
  const double span = frames.back().timestamp - t0;
  if (span < 0.0) throw NonMonotonicTime("frames are not time ordered");
  const auto ticks = static_cast<std::size_t>(std::floor(span * target_rate + 1e-9)) + 1;

  std::vector<FrameRecord> out;
  out.reserve(ticks);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = t0 + static_cast<double>(k) / target_rate;
    while (seg + 2 < frames.size() && frames[seg + 1].timestamp <= t) ++seg;
    const FrameRecord& a = frames[seg];
    const FrameRecord& b = frames[seg + 1];
    const double dt = b.timestamp - a.timestamp;
    double u = dt > 0.0 ? (t - a.timestamp) / dt : 1.0;
    FrameRecord r;
    if (u <= 0.0) {
      r = a;
    } else if (u >= 1.0) {
      r = b;
    } else {
      r.shoulder = lerp(a.shoulder, b.shoulder, u);
      r.elbow = lerp(a.elbow, b.elbow, u);
      r.wrist = lerp(a.wrist, b.wrist, u);
      r.q_upper = slerp(a.q_upper, b.q_upper, u);
      r.q_fore = slerp(a.q_fore, b.q_fore, u);
      r.q_hand = slerp(a.q_hand, b.q_hand, u);
    }
    r.timestamp = t;
    out.push_back(r);
  }
  return out;
}

double minimum_jerk(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("minimum_jerk expects tau in [0, 1]");
  const double t3 = tau * tau * tau;
  return t3 * (10.0 + tau * (-15.0 + 6.0 * tau));
}

}  // namespace teleop
