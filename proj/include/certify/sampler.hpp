#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "certify/errors.hpp"
#include "certify/rng.hpp"

namespace certify {

// One nodal injection draw. The id is the global draw counter; together with
// the run seed it fully determines the sample.
struct Scenario {
  std::int64_t id = 0;
  Eigen::VectorXd x;
};

// Sigma_ij = s^2 * rho^|i-j|, the default correlation structure between
// neighbouring nodes.
inline Eigen::MatrixXd exponential_node_covariance(int n, double std_dev = 0.5,
                                                   double corr = 0.5) {
  if (n < 1) throw DimensionMismatch("node covariance: n must be positive");
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cov(i, j) = std_dev * std_dev * std::pow(corr, std::abs(i - j));
  return cov;
}

struct SamplerConfig {
  Eigen::MatrixXd node_covariance;
  std::uint64_t seed = 0;
  int max_rejections = 100000;
};

// Rejection sampler for a zero-mean multivariate normal truncated to the
// unit hypercube. Proposals are drawn from the untruncated normal and kept
// when every component lies in [0, 1].
class Sampler {
 public:
  explicit Sampler(SamplerConfig cfg) : cfg_(std::move(cfg)) {
    const auto& cov = cfg_.node_covariance;
    if (cov.rows() == 0 || cov.rows() != cov.cols())
      throw DimensionMismatch("sampler: covariance must be square");
    const double scale = cov.cwiseAbs().maxCoeff();
    if (!((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale))
      throw DimensionMismatch("sampler: covariance must be symmetric");
    if (cfg_.max_rejections < 1)
      throw ConfigError("sampler: max_rejections must be positive");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("sampler: covariance is not positive definite");
    chol_ = llt.matrixL();
  }

  int dimension() const { return static_cast<int>(chol_.rows()); }
  const SamplerConfig& config() const { return cfg_; }

  Scenario sample(std::int64_t id) const {
    RngStream rng(cfg_.seed, static_cast<std::uint64_t>(id),
                  Stream::Scenario);
    return sample_with_stream(id, rng);
  }

  Scenario sample_with_stream(std::int64_t id, RngStream& rng) const {
    const int n = dimension();
    Eigen::VectorXd z(n);
    for (int attempt = 0; attempt < cfg_.max_rejections; ++attempt) {
      for (int i = 0; i < n; ++i) z(i) = rng.normal();
      Eigen::VectorXd x = chol_ * z;
      if ((x.array() >= 0.0).all() && (x.array() <= 1.0).all())
        return Scenario{id, std::move(x)};
    }
    throw RejectionBudgetExceeded(
        "sampler: no proposal landed in the unit cube after " +
        std::to_string(cfg_.max_rejections) + " attempts");
  }

  std::vector<Scenario> sample_batch(std::int64_t first_id, int count) const {
    std::vector<Scenario> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(sample(first_id + i));
    return out;
  }

 private:
  SamplerConfig cfg_;
  Eigen::MatrixXd chol_;
};

}  // namespace certify
