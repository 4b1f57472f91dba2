#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "teleop/capture.hpp"
#include "teleop/errors.hpp"

using namespace teleop;

namespace {

std::vector<FrameRecord> random_frames(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<FrameRecord> out;
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t += testutil::uniform(rng, 0.001, 0.02);
    FrameRecord f;
    f.timestamp = t;
    f.shoulder = testutil::random_unit(rng) * 0.7;
    f.elbow = f.shoulder + testutil::random_unit(rng) * 0.3;
    f.wrist = f.elbow + testutil::random_unit(rng) * 0.27;
    f.q_upper = testutil::random_quat(rng);
    f.q_fore = testutil::random_quat(rng);
    f.q_hand = testutil::random_quat(rng);
    out.push_back(f);
  }
  return out;
}

FrameRecord simple(double t, Vec3 e) {
  FrameRecord f;
  f.timestamp = t;
  f.elbow = e;
  f.wrist = e + Vec3{0.27, 0, 0};
  return f;
}

}  // namespace

TEST_CASE("frame files round trip exactly") {
  const auto frames = random_frames(100, 71);
  for (FrameFormat fmt : {FrameFormat::Csv, FrameFormat::Jsonl}) {
    RecordingMeta meta;
    meta.capture_rate = 240;
    meta.upper_length = 0.31;
    const ParsedFrames p = parse_frames(write_frames(frames, fmt, meta), fmt);
    CHECK(p.frames == frames);
    CHECK(p.meta == meta);
    CHECK(parse_frames(write_frames(frames, fmt), fmt).frames == frames);
  }
}

TEST_CASE("missing field is a schema error") {
  json j = frame_to_json(simple(0.0, {0.3, 0, 0}));
  j.erase("wz");
  const std::string text = frame_to_json(simple(0.0, {0.3, 0, 0})).dump() + "\n" + j.dump() + "\n";
  try {
    parse_frames(text, FrameFormat::Jsonl);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.field() == "wz");
    CHECK(e.line() == 2);
  }
  std::string csv = write_frames({simple(0.0, {0.3, 0, 0})}, FrameFormat::Csv);
  csv.replace(csv.find(",wz"), 3, "");
  CHECK_THROWS_AS(parse_frames(csv, FrameFormat::Csv), SchemaError);
}

TEST_CASE("quaternion norm gate") {
  FrameRecord f = simple(0.0, {0.3, 0, 0});
  f.q_hand = {0.5, 0, 0, 0};
  CHECK_THROWS_AS(frame_from_json(frame_to_json(f), 1), NormError);
  CHECK_THROWS_AS(parse_frames(write_frames({f}, FrameFormat::Csv), FrameFormat::Csv), NormError);

  f.q_hand = {1.005, 0, 0, 0};
  const FrameRecord g = frame_from_json(frame_to_json(f));
  CHECK(g.q_hand.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("decreasing timestamps") {
  const std::vector<FrameRecord> frames{simple(0.0, {0.3, 0, 0}), simple(1.0, {0.3, 0, 0}),
                                        simple(0.5, {0.3, 0, 0}), simple(2.0, {0.3, 0, 0})};
  const std::string text = write_frames(frames, FrameFormat::Jsonl);
  CHECK_THROWS_AS(parse_frames(text, FrameFormat::Jsonl), ParseError);
  const ParsedFrames p = parse_frames(text, FrameFormat::Jsonl, {false});
  CHECK(p.frames.size() == 3);
  CHECK(p.dropped_lines == std::vector<std::size_t>{3});
}

TEST_CASE("format helpers") {
  CHECK(frame_format_for_path("a/b.csv") == FrameFormat::Csv);
  CHECK(frame_format_for_path("a/b.jsonl") == FrameFormat::Jsonl);
  CHECK(parse_frame_format("csv") == FrameFormat::Csv);
  CHECK_FALSE(parse_frame_format("xml").has_value());
  const FrameRecord f = random_frames(1, 72)[0];
  CHECK(frame_field(f, 0) == f.timestamp);
  CHECK(frame_field(f, 9) == f.wrist.z);
  CHECK(frame_field(f, 21) == f.q_hand.z);
}

TEST_CASE("resampling") {
  CHECK_THROWS_AS(resample_frames({simple(0, {0.3, 0, 0})}, 100), InsufficientData);

  std::vector<FrameRecord> grid;
  for (int k = 0; k <= 50; ++k) grid.push_back(simple(k / 100.0, {0.3, 0.01 * k, 0}));
  const auto same = resample_frames(grid, 100);
  REQUIRE(same.size() == grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(same[k].timestamp - grid[k].timestamp) <= 1e-12);
    CHECK(distance(same[k].elbow, grid[k].elbow) <= 1e-12);
  }

  FrameRecord a = simple(0.0, {0.3, 0, 0});
  FrameRecord b = simple(1.0, {0.5, 0.2, -0.4});
  b.q_upper = Quat::from_axis_angle({0, 0, 1}, 1.0);
  const auto mid = resample_frames({a, b}, 2.0);
  REQUIRE(mid.size() == 3);
  CHECK(mid[1].timestamp == 0.5);
  CHECK(distance(mid[1].elbow, (a.elbow + b.elbow) * 0.5) < 1e-15);
  CHECK(rotation_angle(mid[1].q_upper) == doctest::Approx(0.5));
  CHECK(mid[2] == b);

  const auto frames = random_frames(40, 73);
  const auto r = resample_frames(frames, 120);
  for (std::size_t k = 0; k < r.size(); ++k)
    CHECK(r[k].timestamp == frames.front().timestamp + static_cast<double>(k) / 120.0);
}

TEST_CASE("minimum jerk profile") {
  CHECK(minimum_jerk(0.0) == 0.0);
  CHECK(minimum_jerk(1.0) == 1.0);
  CHECK(minimum_jerk(0.5) == 0.5);
  double prev = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double s = minimum_jerk(i / 1000.0);
    CHECK(s >= prev);
    prev = s;
  }
  CHECK_THROWS_AS(minimum_jerk(-0.01), DomainError);
  CHECK_THROWS_AS(minimum_jerk(1.01), DomainError);
}
