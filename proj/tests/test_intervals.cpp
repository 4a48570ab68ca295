#include <catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <vector>

#include "certify/intervals.hpp"
#include "certify/rng.hpp"

using namespace certify;

TEST_CASE("score interval reference values", "[intervals]") {
  const ConfidenceInterval half = classic_interval(100, 50, 0.05);
  REQUIRE(half.p_min == Catch::Approx(0.4038315303659957).epsilon(1e-13));
  REQUIRE(half.p_max == Catch::Approx(0.5961684696340044).epsilon(1e-13));

  const ConfidenceInterval one = classic_interval(1, 1, 0.05);
  REQUIRE(one.p_min == Catch::Approx(0.20654931437723742).epsilon(1e-13));
  REQUIRE(one.p_max == 1.0);

  const ConfidenceInterval zero = classic_interval(50, 0, 0.05);
  REQUIRE(zero.p_min == 0.0);
  REQUIRE(zero.p_max > 0.0);
}

TEST_CASE("score interval narrows with evidence", "[intervals]") {
  double last = 1.0;
  for (std::size_t m : {10, 100, 1000, 10000}) {
    const ConfidenceInterval ci = classic_interval(m, m / 2, 0.05);
    REQUIRE(ci.width() < last);
    last = ci.width();
  }
  const std::vector<bool> w{true, false, true, true};
  const ConfidenceInterval ci = classic_interval(w, 0.05);
  const ConfidenceInterval direct = classic_interval(4, 3, 0.05);
  REQUIRE(ci.p_min == direct.p_min);
  REQUIRE(ci.p_max == direct.p_max);
}

TEST_CASE("score interval input validation", "[intervals]") {
  REQUIRE_THROWS_AS(classic_interval(0, 0, 0.05), DimensionMismatch);
  REQUIRE_THROWS_AS(classic_interval(5, 6, 0.05), DimensionMismatch);
  REQUIRE_THROWS_AS(classic_interval(5, 3, 0.0), ConfigError);
  REQUIRE_THROWS_AS(classic_interval(5, 3, 1.0), ConfigError);
}

TEST_CASE("debiased summary worked example", "[intervals]") {
  std::vector<OutcomeRecord> records;
  records.push_back(OutcomeRecord{0, true, 1.0, true});
  records.push_back(OutcomeRecord{1, true, 0.9, false});
  const CltSummary s = clt_summary(records);
  REQUIRE(s.m == 2);
  REQUIRE(s.z_bar == Catch::Approx(19.0 / 18.0).epsilon(1e-15));
  REQUIRE(s.v == Catch::Approx(1.975609756097561).epsilon(1e-14));
  REQUIRE(s.sigma_sq == Catch::Approx(0.05487804878048779).epsilon(1e-14));
}

TEST_CASE("summary validation", "[intervals]") {
  CltAccumulator acc;
  REQUIRE_THROWS_AS(acc.summary(), DimensionMismatch);
  REQUIRE_THROWS_AS(acc.add(OutcomeRecord{0, true, 0.0, false}),
                    DimensionMismatch);
  REQUIRE_THROWS_AS(acc.add(OutcomeRecord{0, true, 1.2, false}),
                    DimensionMismatch);
  REQUIRE_THROWS_AS(acc.add(OutcomeRecord{0, true, 0.9, true}),
                    DimensionMismatch);
  acc.add(OutcomeRecord{0, true, 0.5, false});
  REQUIRE_THROWS_AS(acc.summary(), DegenerateWeights);
}

TEST_CASE("uncertainty interval reference value", "[intervals]") {
  CltSummary s;
  s.z_bar = 0.9;
  s.v = 1000.0;
  s.sigma_sq = 0.02;
  s.m = 1000;
  const ConfidenceInterval ci = uncertainty_interval(s, 0.05);
  REQUIRE(ci.p_min == Catch::Approx(0.8778953692633344).epsilon(1e-13));
  REQUIRE(ci.p_max == Catch::Approx(0.9190432239482215).epsilon(1e-13));
  REQUIRE_THROWS_AS(uncertainty_interval(s, 1.5), ConfigError);
}

TEST_CASE("all-simulated records reduce to the classic interval",
          "[intervals]") {
  RngStream rng(123, 0, Stream::Coin);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng.pick(400);
    CltAccumulator acc;
    std::size_t k = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const bool w = rng.uniform01() < 0.8;
      k += w;
      acc.add(OutcomeRecord{static_cast<std::int64_t>(i), w, 1.0, true});
    }
    const ConfidenceInterval a = uncertainty_interval(acc.summary(), 0.05);
    const ConfidenceInterval b = classic_interval(m, k, 0.05);
    REQUIRE(std::abs(a.p_min - b.p_min) <= 1e-12);
    REQUIRE(std::abs(a.p_max - b.p_max) <= 1e-12);
  }
}

TEST_CASE("threshold validation allows the degenerate closed band",
          "[intervals]") {
  validate_thresholds(DecisionThresholds{0.0, 1.0});
  validate_thresholds(DecisionThresholds{0.01, 0.99});
  REQUIRE_THROWS_AS(validate_thresholds(DecisionThresholds{0.6, 0.99}),
                    ConfigError);
  REQUIRE_THROWS_AS(validate_thresholds(DecisionThresholds{0.01, 0.4}),
                    ConfigError);
  REQUIRE_THROWS_AS(validate_thresholds(DecisionThresholds{-0.1, 0.99}),
                    ConfigError);
}

TEST_CASE("prediction drawing obeys the decision band", "[intervals]") {
  const DecisionThresholds t{0.1, 0.9};
  RngStream rng(9, 0, Stream::Prediction);
  REQUIRE(!draw_prediction(0, 0.5, t, rng).has_value());
  REQUIRE(!draw_prediction(0, 0.10000001, t, rng).has_value());

  int ones = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto rec = draw_prediction(i, 0.95, t, rng);
    REQUIRE(rec.has_value());
    REQUIRE(!rec->simulated);
    REQUIRE(rec->q == Catch::Approx(rec->w ? 0.95 : 0.05));
    ones += rec->w;
  }
  REQUIRE(ones > 1800);
  REQUIRE(ones < 1995);

  const auto sure = draw_prediction(0, 1.0, t, rng);
  REQUIRE(sure->w);
  REQUIRE(sure->q == 1.0);
  const auto never = draw_prediction(0, 0.0, t, rng);
  REQUIRE(!never->w);
  REQUIRE(never->q == 1.0);

  RngStream a(4, 2, Stream::Prediction), b(4, 2, Stream::Prediction);
  REQUIRE(draw_prediction(5, 0.93, t, a)->w == draw_prediction(5, 0.93, t, b)->w);
  REQUIRE_THROWS_AS(draw_prediction(0, 1.2, t, rng), DimensionMismatch);
}

TEST_CASE("clopper-pearson interval matches reference points", "[intervals]") {
  const ConfidenceInterval even = clopper_pearson(100, 50, 0.01);
  REQUIRE(even.p_min == Catch::Approx(0.36886143735892407).epsilon(1e-10));
  REQUIRE(even.p_max == Catch::Approx(0.6311385626410759).epsilon(1e-10));

  const ConfidenceInterval all = clopper_pearson(10, 10, 0.05);
  REQUIRE(all.p_min == Catch::Approx(0.6915028921812392).epsilon(1e-10));
  REQUIRE(all.p_max == 1.0);

  const ConfidenceInterval none = clopper_pearson(10, 0, 0.05);
  REQUIRE(none.p_min == 0.0);
  REQUIRE(none.p_max == Catch::Approx(0.3084971078187608).epsilon(1e-10));

  const ConfidenceInterval one = clopper_pearson(1, 1, 0.01);
  REQUIRE(one.p_min == Catch::Approx(0.005).epsilon(1e-12));
  REQUIRE(one.p_max == 1.0);

  const ConfidenceInterval big = clopper_pearson(2000, 1900, 0.05);
  REQUIRE(big.p_min == Catch::Approx(0.939518277916848).epsilon(1e-10));
  REQUIRE(big.p_max == Catch::Approx(0.9591357322817486).epsilon(1e-10));

  REQUIRE_THROWS_AS(clopper_pearson(0, 0, 0.05), DimensionMismatch);
  REQUIRE_THROWS_AS(clopper_pearson(5, 6, 0.05), DimensionMismatch);
  REQUIRE_THROWS_AS(clopper_pearson(5, 3, 0.0), ConfigError);
}

TEST_CASE("clopper-pearson contains the score interval away from the edges",
          "[intervals]") {
  for (std::size_t m : {5, 20, 200}) {
    for (std::size_t k = m / 5; k < m; k += m / 5) {
      const ConfidenceInterval exact = clopper_pearson(m, k, 0.05);
      const ConfidenceInterval score = classic_interval(m, k, 0.05);
      REQUIRE(exact.p_min <= score.p_min + 1e-12);
      REQUIRE(exact.p_max >= score.p_max - 1e-12);
    }
  }
}
