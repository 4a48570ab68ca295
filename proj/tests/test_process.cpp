#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "certify/process.hpp"

using namespace certify;

namespace {

ZoneConfig test_zone() {
  ZoneConfig zone = generate_zone(3, 4, 21);
  zone.history_size = 80;
  return zone;
}

RunConfig test_config() {
  RunConfig cfg;
  cfg.zone_path = "inline";
  cfg.budget = 150;
  cfg.batch_size = 25;
  cfg.seed = 5;
  cfg.max_iterations = 600;
  cfg.qmc.accuracy = 1e-3;
  cfg.mgp.refit_period = 2;
  return cfg;
}

std::string csv_bytes(const RunResult& res) {
  const auto path =
      std::filesystem::temp_directory_path() / "certify_proc_cmp.csv";
  write_log_csv(path.string(), res.rows);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::filesystem::remove(path);
  return text;
}

void check_common_invariants(const RunResult& res, const RunConfig& cfg) {
  REQUIRE(!res.rows.empty());
  std::size_t sims = 0;
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const IterationRow& r = res.rows[i];
    REQUIRE(r.p_min >= 0.0);
    REQUIRE(r.p_max <= 1.0);
    REQUIRE(r.p_min <= r.p_max);
    if (r.simulated) ++sims;
    REQUIRE(r.n_sims == sims);
    if (i > 0) REQUIRE(r.scenario_id > res.rows[i - 1].scenario_id);
  }
  REQUIRE(sims <= cfg.budget);
  REQUIRE(res.summary.iterations == res.rows.size());
  REQUIRE(res.summary.simulations == sims);
  REQUIRE(res.summary.p_min == res.rows.back().p_min);
  REQUIRE(res.summary.p_max == res.rows.back().p_max);
  REQUIRE(res.summary.alpha == cfg.alpha);
  REQUIRE(res.summary.seed == cfg.seed);
}

}  // namespace

TEST_CASE("brute force consumes exactly the budget", "[process]") {
  const ZoneConfig zone = test_zone();
  RunConfig cfg = test_config();
  cfg.max_iterations = 0;
  const RunResult res = run_brute_force(zone, cfg);
  check_common_invariants(res, cfg);
  REQUIRE(res.rows.size() == cfg.budget);
  REQUIRE(res.summary.process == "brute_force");
  for (const IterationRow& r : res.rows) {
    REQUIRE(r.simulated);
    REQUIRE(std::isnan(r.p_pred));
    REQUIRE(r.elapsed_s == 0.0);
  }
}

TEST_CASE("brute force honors the width stop rule", "[process]") {
  const ZoneConfig zone = test_zone();
  RunConfig cfg = test_config();
  cfg.max_iterations = 0;
  cfg.budget = 2000;
  cfg.stop = StopRule::IntervalWidth;
  cfg.width_target = 0.2;
  const RunResult res = run_brute_force(zone, cfg);
  check_common_invariants(res, cfg);
  REQUIRE(res.rows.size() < cfg.budget);
  REQUIRE(res.rows.back().p_max - res.rows.back().p_min <= 0.2);
}

TEST_CASE("proxy process spends the budget on uncertain scenarios",
          "[process]") {
  const ZoneConfig zone = test_zone();
  const RunConfig cfg = test_config();
  const RunResult res = run_proxy_process(zone, cfg);
  check_common_invariants(res, cfg);
  REQUIRE(res.summary.process == "proxy");
  REQUIRE(res.summary.iterations <= cfg.max_iterations);
  REQUIRE(res.summary.iterations >= res.summary.simulations);
  for (const IterationRow& r : res.rows) {
    REQUIRE(r.p_pred >= 0.0);
    REQUIRE(r.p_pred <= 1.0);
    REQUIRE(r.sigma_star >= 0.0);
    REQUIRE(r.entropy >= 0.0);
    REQUIRE(r.entropy <= 1.0);
  }
  const std::size_t head = std::min<std::size_t>(res.rows.size(), 25);
  for (std::size_t i = 0; i < head; ++i) REQUIRE(res.rows[i].simulated);
}

TEST_CASE("identical seeds give identical logs across thread counts",
          "[process]") {
  const ZoneConfig zone = test_zone();
  RunConfig cfg = test_config();

  const std::string brute_once = csv_bytes(run_brute_force(zone, cfg));
  REQUIRE(csv_bytes(run_brute_force(zone, cfg)) == brute_once);
  cfg.threads = 4;
  REQUIRE(csv_bytes(run_brute_force(zone, cfg)) == brute_once);

  cfg.threads = 1;
  const std::string proxy_once = csv_bytes(run_proxy_process(zone, cfg));
  cfg.threads = 4;
  REQUIRE(csv_bytes(run_proxy_process(zone, cfg)) == proxy_once);

  cfg.threads = 1;
  cfg.seed = 6;
  REQUIRE(csv_bytes(run_proxy_process(zone, cfg)) != proxy_once);
}

TEST_CASE("moving average trails the window", "[process]") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> ma = moving_average(v, 2);
  REQUIRE(ma == std::vector<double>{1.0, 1.5, 2.5, 3.5});
  REQUIRE(moving_average(v, 1) == v);
  REQUIRE(moving_average(v, 10).back() == Catch::Approx(2.5));
  REQUIRE_THROWS_AS(moving_average(v, 0), ConfigError);
}
