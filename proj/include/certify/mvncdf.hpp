#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "certify/errors.hpp"
#include "certify/mgp.hpp"
#include "certify/rng.hpp"
#include "certify/stats.hpp"

namespace certify {

// P(y <= threshold on every line) for y ~ N(mean, scale * Omega).
struct RectangleProbQuery {
  Eigen::VectorXd mean;
  double scale = 0.0;
  const OutputCovariance* output_cov = nullptr;
  double threshold = 1.0;
};

struct RectangleProbResult {
  double probability = 0.0;
  double error_estimate = 0.0;
  bool accuracy_reached = true;
  std::size_t points = 0;
};

namespace detail {

inline std::vector<double> lattice_generators(int dim) {
  std::vector<double> gen;
  gen.reserve(static_cast<std::size_t>(dim));
  int found = 0;
  for (int n = 2; found < dim; ++n) {
    bool prime = n >= 2;
    for (int d = 2; d * d <= n; ++d)
      if (n % d == 0) {
        prime = false;
        break;
      }
    if (prime) {
      double r = std::sqrt(static_cast<double>(n));
      gen.push_back(r - std::floor(r));
      ++found;
    }
  }
  return gen;
}

// Separation-of-variables integrand: given uniforms w in [0,1)^(d-1) return
// the product of conditional one-sided probabilities along the Cholesky.
inline double sov_integrand(const Eigen::MatrixXd& chol,
                            const Eigen::VectorXd& upper, const double* w) {
  const Eigen::Index d = upper.size();
  double prob = normal_cdf(upper(0) / chol(0, 0));
  double acc = prob;
  Eigen::VectorXd y(d - 1);
  for (Eigen::Index i = 1; i < d; ++i) {
    const double u = std::clamp(w[i - 1] * prob, 1e-16, 1.0 - 1e-16);
    y(i - 1) = normal_quantile(u);
    double shift = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) shift += chol(i, j) * y(j);
    prob = normal_cdf((upper(i) - shift) / chol(i, i));
    acc *= prob;
  }
  return acc;
}

}  // namespace detail

// Genz-style randomized quasi Monte Carlo for the one-sided rectangle
// probability. Variables are processed in order of increasing marginal
// probability; a shifted Richtmyer lattice with a baker transform is grown
// until the error estimate meets the accuracy target or the point budget
// runs out.
inline RectangleProbResult safe_probability(const RectangleProbQuery& query,
                                            double accuracy, RngStream& rng,
                                            std::size_t max_points = 1000000) {
  if (query.output_cov == nullptr)
    throw DimensionMismatch("safe_probability: missing output covariance");
  const Eigen::Index l = query.mean.size();
  if (l != query.output_cov->size())
    throw DimensionMismatch("safe_probability: mean and omega disagree");
  if (!(query.scale >= 0.0))
    throw DimensionMismatch("safe_probability: negative scale");
  if (!(accuracy > 0.0))
    throw ConfigError("safe_probability: accuracy must be > 0");

  RectangleProbResult out;
  if (query.scale == 0.0) {
    out.probability =
        (query.mean.array() <= query.threshold).all() ? 1.0 : 0.0;
    return out;
  }

  Eigen::VectorXd upper = (query.threshold - query.mean.array()).matrix();
  Eigen::MatrixXd cov = query.scale * query.output_cov->matrix();

  if (l == 1) {
    out.probability = normal_cdf(upper(0) / std::sqrt(cov(0, 0)));
    return out;
  }

  // most restrictive variable first
  std::vector<Eigen::Index> order(static_cast<std::size_t>(l));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return upper(a) / std::sqrt(cov(a, a)) < upper(b) / std::sqrt(cov(b, b));
  });
  Eigen::VectorXd b(l);
  Eigen::MatrixXd c(l, l);
  for (Eigen::Index i = 0; i < l; ++i) {
    b(i) = upper(order[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < l; ++j)
      c(i, j) = cov(order[static_cast<std::size_t>(i)],
                    order[static_cast<std::size_t>(j)]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    c.diagonal().array() += 1e-12 * c.diagonal().mean();
    llt.compute(c);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("safe_probability: covariance factorization");
  }
  const Eigen::MatrixXd chol = llt.matrixL();

  const int s = static_cast<int>(l) - 1;
  const std::vector<double> gen = detail::lattice_generators(s);
  constexpr int kShifts = 12;
  std::vector<double> shifts(static_cast<std::size_t>(kShifts * s));
  for (double& v : shifts) v = rng.uniform01();

  std::vector<double> sums(kShifts, 0.0);
  std::vector<double> w(static_cast<std::size_t>(s));
  std::size_t per_shift = 0;
  std::size_t round_size = 64;
  while (true) {
    for (int r = 0; r < kShifts; ++r) {
      const double* delta = &shifts[static_cast<std::size_t>(r * s)];
      double acc = 0.0;
      for (std::size_t k = per_shift + 1; k <= per_shift + round_size; ++k) {
        for (int j = 0; j < s; ++j) {
          double v = static_cast<double>(k) * gen[static_cast<std::size_t>(j)] +
                     delta[j];
          v -= std::floor(v);
          w[static_cast<std::size_t>(j)] = std::abs(2.0 * v - 1.0);
        }
        acc += detail::sov_integrand(chol, b, w.data());
      }
      sums[static_cast<std::size_t>(r)] += acc;
    }
    per_shift += round_size;
    out.points = static_cast<std::size_t>(kShifts) * per_shift;

    double mean = 0.0;
    for (double v : sums) mean += v / static_cast<double>(per_shift);
    mean /= kShifts;
    double var = 0.0;
    for (double v : sums) {
      const double d = v / static_cast<double>(per_shift) - mean;
      var += d * d;
    }
    var /= (kShifts - 1);
    out.probability = std::clamp(mean, 0.0, 1.0);
    out.error_estimate = 3.0 * std::sqrt(var / kShifts);
    if (out.error_estimate <= accuracy) {
      out.accuracy_reached = true;
      return out;
    }
    if (out.points >= max_points) {
      out.accuracy_reached = false;
      return out;
    }
    round_size = std::min<std::size_t>(
        2 * round_size, (max_points / kShifts) - per_shift + 1);
  }
}

// Normalized entropy of the safety verdict implied by p.
inline double prediction_entropy(double p) { return binary_entropy(p); }

}  // namespace certify
