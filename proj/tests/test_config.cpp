#include <doctest.h>

#include <string>

#include <nlohmann/json.hpp>

#include "core/config.hpp"
#include "core/error.hpp"

using namespace fopdg;

TEST_CASE("defaults pass validation") {
  const Config cfg;
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("key-value text parsing") {
  const std::string text =
      "# vehicle overrides\n"
      "m0 = 650\n"
      "m_dry = 240   # lighter structure\n"
      "\n"
      "tau_max = 0.8\n"
      "train_optimizer = adam\n"
      "tau_hidden = 12, 12\n";
  const Config cfg = parse_config(text);

  CHECK(cfg.phys.m0 == 650.0);
  CHECK(cfg.phys.m_dry == 240.0);
  CHECK(cfg.gen.tau_max == 0.8);
  CHECK(cfg.train.optimizer == "adam");
  CHECK(cfg.train.tau_hidden == std::vector<int>{12, 12});
  // untouched keys keep their defaults
  CHECK(cfg.phys.Tm == 1500.0);
}

TEST_CASE("unknown keys and bad values are parse errors") {
  CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("m0 = heavy\n"), Error);
  CHECK_THROWS_AS(parse_config("m0\n"), Error);

  try {
    parse_config("no_such_key = 1\n");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("no_such_key") != std::string::npos);
  }
}

TEST_CASE("single-key overrides") {
  Config cfg;
  config_set(cfg, "sim_update_period_s", "0.5");
  CHECK(cfg.sim.update_period_s == 0.5);
  config_set(cfg, "oracle_max_iter", "10");
  CHECK(cfg.oracle.max_iter == 10);
  CHECK_THROWS_AS(config_set(cfg, "bogus", "1"), Error);
}

TEST_CASE("validation rejects inconsistent vehicles") {
  Config cfg;
  cfg.phys.m_dry = cfg.phys.m0 + 1.0;
  CHECK_THROWS_AS(validate(cfg), Error);

  cfg = Config{};
  cfg.phys.Tm = -5.0;
  CHECK_THROWS_AS(validate(cfg), Error);

  cfg = Config{};
  cfg.sampling.pr_min = cfg.sampling.pr_max + 1.0;
  CHECK_THROWS_AS(validate(cfg), Error);

  cfg = Config{};
  cfg.sim.deadband = 1.5;  // must lie in [0, 1)
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg.sim.deadband = -0.1;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg.sim.deadband = 0.05;
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("JSON round trip") {
  Config cfg;
  cfg.phys.m0 = 615.0;
  cfg.gen.grid_dt = 0.004;
  cfg.train.optimizer = "adam";
  cfg.train.angle_hidden = {8, 8};
  cfg.sim.deadband = 0.02;
  cfg.oracle.tol = 1e-8;

  const nlohmann::json j = config_to_json(cfg);
  const Config back = config_from_json(j);

  CHECK(config_to_json(back) == j);
  CHECK(back.phys.m0 == 615.0);
  CHECK(back.gen.grid_dt == 0.004);
  CHECK(back.train.optimizer == "adam");
  CHECK(back.train.angle_hidden == std::vector<int>{8, 8});
  CHECK(back.sim.deadband == 0.02);
  CHECK(back.oracle.tol == 1e-8);
}

TEST_CASE("JSON round trip covers every key") {
  // every key emitted must be accepted back, so a manifest replay can
  // never miss a setting
  const nlohmann::json j = config_to_json(Config{});
  CHECK(j.size() > 30);
  CHECK_NOTHROW(config_from_json(j));
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), Error);
}

TEST_CASE("missing config file raises io error") {
  CHECK_THROWS_AS(load_config("/nonexistent/fopdg.cfg"), Error);
  try {
    load_config("/nonexistent/fopdg.cfg");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
}
