#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "teleop/config.hpp"
#include "teleop/errors.hpp"

using namespace teleop;

namespace {

const std::filesystem::path kDefaultFile =
    std::filesystem::path(TELEOP_SOURCE_DIR) / "config" / "default.jsonc";

struct EnvGuard {
  const char* name;
  explicit EnvGuard(const char* n, const char* value) : name(n) { ::setenv(n, value, 1); }
  ~EnvGuard() { ::unsetenv(name); }
};

}  // namespace

TEST_CASE("shipped default file equals the built-in defaults") {
  const TeleopConfig file = load_config(kDefaultFile);
  CHECK(config_to_json(file) == config_to_json(TeleopConfig{}));
}

TEST_CASE("config_to_json round trips") {
  TeleopConfig cfg;
  cfg.ring.count = 8;
  cfg.controller.smoothing_alpha = 0.5;
  cfg.posture.order = {3, 2, 1, 0};
  cfg.service.port = 1234;
  const TeleopConfig back = parse_config(config_to_json(cfg).dump());
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK(back.ring.count == 8);
  CHECK(back.controller.limits.upper == back.limits.upper);
}

TEST_CASE("partial sections and comments") {
  const TeleopConfig cfg = parse_config(R"({
    // only one key
    "ring_task": {"radius": 0.3} /* trailing */
  })");
  CHECK(cfg.ring.radius == 0.3);
  CHECK(cfg.ring.count == 11);
  CHECK(cfg.controller.control_rate == 100.0);
}

TEST_CASE("invalid configs") {
  CHECK_THROWS_AS(parse_config(R"({"ring_task": {"radius": 0.3, "colour": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"bogus": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"controller": {"smoothing_alpha": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"retarget": {"calibration": [{"gain": 2}]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"ring_task": {"count": "eleven"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/teleop.jsonc"), ConfigError);
}

TEST_CASE("environment overrides") {
  const auto dir = std::filesystem::temp_directory_path() / "teleop_config_test";
  std::filesystem::create_directories(dir);
  const auto file = dir / "c.jsonc";
  std::ofstream(file) << R"({"service": {"port": 4321}, "ring_task": {"count": 9}})";

  {
    EnvGuard cfg("TELEOP_CONFIG", file.c_str());
    const TeleopConfig c = load_config_with_env(std::nullopt);
    CHECK(c.ring.count == 9);
    CHECK(c.service.port == 4321);
    EnvGuard port("TELEOP_PORT", "5555");
    CHECK(load_config_with_env(std::nullopt).service.port == 5555);
    // An explicit path wins over TELEOP_CONFIG.
    CHECK(load_config_with_env(kDefaultFile).ring.count == 11);
  }
  {
    EnvGuard port("TELEOP_PORT", "99999");
    CHECK_THROWS_AS(load_config_with_env(std::nullopt), ConfigError);
  }
  CHECK(load_config_with_env(std::nullopt).service.port == 9870);
  std::filesystem::remove_all(dir);
}
