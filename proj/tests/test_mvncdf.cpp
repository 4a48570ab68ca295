#include <catch_amalgamated.hpp>

#include <cmath>

#include "certify/mvncdf.hpp"

using namespace certify;

TEST_CASE("one-dimensional probability is the exact normal CDF", "[mvncdf]") {
  const OutputCovariance id1(Eigen::MatrixXd::Identity(1, 1));
  RectangleProbQuery q;
  q.mean = Eigen::VectorXd::Zero(1);
  q.scale = 1.0;
  q.output_cov = &id1;
  RngStream rng(1, 0, Stream::Qmc);
  const RectangleProbResult res = safe_probability(q, 1e-6, rng);
  REQUIRE(res.probability ==
          Catch::Approx(0.8413447460685429).epsilon(1e-12));
  REQUIRE(res.accuracy_reached);
}

TEST_CASE("independent components factorize", "[mvncdf]") {
  const OutputCovariance id2(Eigen::MatrixXd::Identity(2, 2));
  RectangleProbQuery q;
  q.mean = Eigen::VectorXd::Zero(2);
  q.scale = 1.0;
  q.output_cov = &id2;
  RngStream rng(2, 0, Stream::Qmc);
  const RectangleProbResult res = safe_probability(q, 1e-5, rng);
  REQUIRE(res.probability ==
          Catch::Approx(0.707860981737141).margin(5e-5));
}

TEST_CASE("zero posterior variance degenerates to an indicator", "[mvncdf]") {
  const OutputCovariance id2(Eigen::MatrixXd::Identity(2, 2));
  RectangleProbQuery q;
  q.mean = Eigen::VectorXd::Zero(2);
  q.output_cov = &id2;
  q.scale = 0.0;
  q.mean << 0.5, 1.2;
  RngStream rng(3, 0, Stream::Qmc);
  REQUIRE(safe_probability(q, 1e-4, rng).probability == 0.0);
  q.mean << 0.5, 0.9;
  REQUIRE(safe_probability(q, 1e-4, rng).probability == 1.0);
}

TEST_CASE("correlated case agrees with plain Monte Carlo", "[mvncdf]") {
  Eigen::MatrixXd omega(3, 3);
  omega << 1.0, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0;
  const OutputCovariance cov(omega);
  RectangleProbQuery q;
  q.mean = Eigen::VectorXd(3);
  q.mean << 0.2, 0.4, 0.6;
  q.scale = 0.3;
  q.output_cov = &cov;

  RngStream rng(4, 0, Stream::Qmc);
  const RectangleProbResult res = safe_probability(q, 1e-5, rng);

  const Eigen::MatrixXd chol =
      (q.scale * omega).llt().matrixL();
  RngStream mc(5, 0, Stream::Bench);
  const int n = 1000000;
  int hits = 0;
  Eigen::VectorXd z(3);
  for (int i = 0; i < n; ++i) {
    z << mc.normal(), mc.normal(), mc.normal();
    const Eigen::VectorXd y = q.mean + chol * z;
    hits += (y.array() <= q.threshold).all() ? 1 : 0;
  }
  const double p_mc = static_cast<double>(hits) / n;
  const double se = std::sqrt(p_mc * (1.0 - p_mc) / n);
  REQUIRE(std::abs(res.probability - p_mc) < 4.0 * se + 1e-4);
}

TEST_CASE("accuracy flag reports exhaustion honestly", "[mvncdf]") {
  Eigen::MatrixXd omega(4, 4);
  omega.setIdentity();
  omega.topRightCorner(2, 2).setConstant(0.3);
  omega.bottomLeftCorner(2, 2).setConstant(0.3);
  const OutputCovariance cov(omega);
  RectangleProbQuery q;
  q.mean = Eigen::VectorXd::Constant(4, 0.8);
  q.scale = 0.5;
  q.output_cov = &cov;
  RngStream rng(6, 0, Stream::Qmc);
  const RectangleProbResult res = safe_probability(q, 1e-12, rng, 20000);
  REQUIRE(!res.accuracy_reached);
  REQUIRE(res.points <= 20000 * 12 + 12 * 64);
  REQUIRE(res.probability >= 0.0);
  REQUIRE(res.probability <= 1.0);
}

TEST_CASE("query validation", "[mvncdf]") {
  const OutputCovariance id2(Eigen::MatrixXd::Identity(2, 2));
  RectangleProbQuery q;
  q.mean = Eigen::VectorXd::Zero(2);
  q.scale = 1.0;
  RngStream rng(7, 0, Stream::Qmc);
  REQUIRE_THROWS_AS(safe_probability(q, 1e-4, rng), DimensionMismatch);
  q.output_cov = &id2;
  q.mean = Eigen::VectorXd::Zero(3);
  REQUIRE_THROWS_AS(safe_probability(q, 1e-4, rng), DimensionMismatch);
  q.mean = Eigen::VectorXd::Zero(2);
  q.scale = -1.0;
  REQUIRE_THROWS_AS(safe_probability(q, 1e-4, rng), DimensionMismatch);
  q.scale = 1.0;
  REQUIRE_THROWS_AS(safe_probability(q, 0.0, rng), ConfigError);
}

TEST_CASE("entropy of a prediction", "[mvncdf]") {
  REQUIRE(prediction_entropy(0.5) == 1.0);
  REQUIRE(prediction_entropy(0.01) ==
          Catch::Approx(0.08079313589591118).epsilon(1e-12));
}
