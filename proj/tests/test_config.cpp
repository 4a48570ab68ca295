#include <catch_amalgamated.hpp>

#include <cmath>

#include "certify/config.hpp"

using namespace certify;

TEST_CASE("minimal config fills defaults", "[config]") {
  const RunConfig cfg =
      parse_run_config(nlohmann::json::parse(R"({"zone": "z.json"})"));
  REQUIRE(cfg.zone_path == "z.json");
  REQUIRE(cfg.alpha == 0.05);
  REQUIRE(cfg.budget == 20000);
  REQUIRE(cfg.batch_size == 100);
  REQUIRE(cfg.seed == 1);
  REQUIRE(cfg.threads == 1);
  REQUIRE(!cfg.record_timing);
  REQUIRE(cfg.stop == StopRule::Budget);
  REQUIRE(cfg.max_iterations == 0);
  REQUIRE(std::isnan(cfg.reference_p_safe));
  REQUIRE(cfg.thresholds.p_inf == 0.01);
  REQUIRE(cfg.thresholds.p_sup == 0.99);
  REQUIRE(cfg.mgp.locality.max_neighbors == 100);
  REQUIRE(cfg.mgp.locality.max_distance == 1.0);
  REQUIRE(cfg.qmc.accuracy == 1e-4);
}

TEST_CASE("config round-trips through JSON", "[config]") {
  RunConfig cfg;
  cfg.zone_path = "zones/a.json";
  cfg.alpha = 0.01;
  cfg.budget = 555;
  cfg.batch_size = 7;
  cfg.seed = 42;
  cfg.threads = 8;
  cfg.stop = StopRule::IntervalWidth;
  cfg.width_target = 0.015;
  cfg.max_iterations = 1234;
  cfg.reference_p_safe = 0.9185;
  cfg.sampler.corr = 0.25;
  cfg.thresholds = DecisionThresholds{0.02, 0.98};
  cfg.mgp.init.length_scale = 2.5;
  cfg.mgp.refit_period = 3;
  cfg.qmc.accuracy = 1e-5;
  const RunConfig back = parse_run_config(run_config_to_json(cfg));
  REQUIRE(back.zone_path == cfg.zone_path);
  REQUIRE(back.alpha == cfg.alpha);
  REQUIRE(back.budget == cfg.budget);
  REQUIRE(back.batch_size == cfg.batch_size);
  REQUIRE(back.seed == cfg.seed);
  REQUIRE(back.threads == cfg.threads);
  REQUIRE(back.stop == cfg.stop);
  REQUIRE(back.width_target == cfg.width_target);
  REQUIRE(back.max_iterations == cfg.max_iterations);
  REQUIRE(back.reference_p_safe == cfg.reference_p_safe);
  REQUIRE(back.sampler.corr == cfg.sampler.corr);
  REQUIRE(back.thresholds.p_inf == cfg.thresholds.p_inf);
  REQUIRE(back.thresholds.p_sup == cfg.thresholds.p_sup);
  REQUIRE(back.mgp.init.length_scale == cfg.mgp.init.length_scale);
  REQUIRE(back.mgp.refit_period == cfg.mgp.refit_period);
  REQUIRE(back.qmc.accuracy == cfg.qmc.accuracy);
}

TEST_CASE("config errors name the offending field", "[config]") {
  const auto parse = [](const char* text) {
    return parse_run_config(nlohmann::json::parse(text));
  };
  REQUIRE_THROWS_WITH(parse(R"({"zone": "z", "alpha": 1.5})"),
                      Catch::Matchers::ContainsSubstring("alpha"));
  REQUIRE_THROWS_WITH(parse(R"({"zone": "z", "budget": 0})"),
                      Catch::Matchers::ContainsSubstring("budget"));
  REQUIRE_THROWS_WITH(parse(R"({})"),
                      Catch::Matchers::ContainsSubstring("zone"));
  REQUIRE_THROWS_WITH(parse(R"({"zone": "z", "typo": 1})"),
                      Catch::Matchers::ContainsSubstring("typo"));
  REQUIRE_THROWS_WITH(
      parse(R"({"zone": "z", "sampler": {"corr": 1.0}})"),
      Catch::Matchers::ContainsSubstring("corr"));
  REQUIRE_THROWS_WITH(
      parse(R"({"zone": "z", "stop": {"rule": "interval_width"}})"),
      Catch::Matchers::ContainsSubstring("width_target"));
  REQUIRE_THROWS_WITH(
      parse(R"({"zone": "z", "stop": {"rule": "sideways"}})"),
      Catch::Matchers::ContainsSubstring("stop.rule"));
  REQUIRE_THROWS_WITH(
      parse(R"({"zone": "z", "thresholds": {"p_inf": 0.7}})"),
      Catch::Matchers::ContainsSubstring("p_inf"));
  REQUIRE_THROWS_WITH(parse(R"({"zone": "z", "alpha": "high"})"),
                      Catch::Matchers::ContainsSubstring("alpha"));
  REQUIRE_THROWS_AS(load_run_config("/nonexistent/cfg.json"), ConfigError);
}
