#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "certify/errors.hpp"
#include "certify/rng.hpp"
#include "certify/stats.hpp"

namespace certify {

// One certification iteration: the safety verdict used by the estimator,
// how trustworthy it is, and whether it came from the simulator (q = 1) or
// from the proxy.
struct OutcomeRecord {
  std::int64_t scenario_id = 0;
  bool w = false;
  double q = 1.0;
  bool simulated = true;
};

struct ConfidenceInterval {
  double p_min = 0.0;
  double p_max = 1.0;

  double width() const { return p_max - p_min; }
  double midpoint() const { return 0.5 * (p_min + p_max); }
};

struct DecisionThresholds {
  double p_inf = 0.01;
  double p_sup = 0.99;
};

inline void validate_thresholds(const DecisionThresholds& t) {
  // closed endpoints 0 and 1 are allowed and disable the proxy entirely
  if (!(t.p_inf >= 0.0 && t.p_inf < 0.5 && t.p_sup > 0.5 && t.p_sup <= 1.0))
    throw ConfigError("thresholds: need 0 <= p_inf < 0.5 < p_sup <= 1");
}

// Score interval for a plain Bernoulli sample.
inline ConfidenceInterval classic_interval(std::size_t trials,
                                           std::size_t successes,
                                           double alpha) {
  if (trials == 0) throw DimensionMismatch("classic_interval: no trials");
  if (successes > trials)
    throw DimensionMismatch("classic_interval: successes exceed trials");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("classic_interval: alpha outside (0, 1)");
  const double m = static_cast<double>(trials);
  const double zb = static_cast<double>(successes) / m;
  const double quant = normal_quantile(1.0 - alpha / 2.0);
  const double q2 = quant * quant;
  const double den = 1.0 + q2 / m;
  const double center = zb + q2 / (2.0 * m);
  const double half =
      quant * std::sqrt(zb * (1.0 - zb) / m + q2 / (4.0 * m * m));
  return ConfidenceInterval{std::clamp((center - half) / den, 0.0, 1.0),
                            std::clamp((center + half) / den, 0.0, 1.0)};
}

inline ConfidenceInterval classic_interval(const std::vector<bool>& w,
                                           double alpha) {
  std::size_t k = 0;
  for (bool v : w) k += v ? 1 : 0;
  return classic_interval(w.size(), k, alpha);
}

// Exact (Clopper-Pearson) binomial interval from beta quantiles. The guesses
// warm-start the quantile search across consecutive sample sizes.
inline ConfidenceInterval clopper_pearson(std::size_t trials,
                                          std::size_t successes, double alpha,
                                          double guess_min = -1.0,
                                          double guess_max = -1.0) {
  if (trials == 0) throw DimensionMismatch("clopper_pearson: no trials");
  if (successes > trials)
    throw DimensionMismatch("clopper_pearson: successes exceed trials");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("clopper_pearson: alpha outside (0, 1)");
  const double m = static_cast<double>(trials);
  const double k = static_cast<double>(successes);
  ConfidenceInterval ci;
  ci.p_min = successes == 0
                 ? 0.0
                 : inverse_regularized_incomplete_beta(k, m - k + 1.0,
                                                       alpha / 2.0, guess_min);
  ci.p_max = successes == trials
                 ? 1.0
                 : inverse_regularized_incomplete_beta(
                       k + 1.0, m - k, 1.0 - alpha / 2.0, guess_max);
  return ci;
}

// Sufficient statistics of the debiased estimator over a mixed record set:
//   z_bar  = sum(w - (1-q)) / sum(2q - 1)
//   v      = (sum(2q - 1))^2 / sum((2q - 1)^2)   effective sample size
//   sigma^2 = sum(q (1-q)) / sum((2q - 1)^2)     prediction uncertainty
struct CltSummary {
  double z_bar = 0.0;
  double v = 0.0;
  double sigma_sq = 0.0;
  std::size_t m = 0;
};

class CltAccumulator {
 public:
  void add(const OutcomeRecord& rec) {
    if (!(rec.q > 0.0 && rec.q <= 1.0))
      throw DimensionMismatch("clt: record q outside (0, 1]");
    if (rec.simulated && rec.q != 1.0)
      throw DimensionMismatch("clt: simulated record must have q = 1");
    const double d = 2.0 * rec.q - 1.0;
    num_ += (rec.w ? 1.0 : 0.0) - (1.0 - rec.q);
    den_ += d;
    den_sq_ += d * d;
    q_var_ += rec.q * (1.0 - rec.q);
    ++m_;
  }

  std::size_t count() const { return m_; }

  CltSummary summary() const {
    if (m_ == 0) throw DimensionMismatch("clt: empty record set");
    if (!(den_ > 0.0))
      throw DegenerateWeights("clt: sum of prediction weights is not positive");
    return CltSummary{num_ / den_, den_ * den_ / den_sq_, q_var_ / den_sq_,
                      m_};
  }

 private:
  double num_ = 0.0, den_ = 0.0, den_sq_ = 0.0, q_var_ = 0.0;
  std::size_t m_ = 0;
};

inline CltSummary clt_summary(const std::vector<OutcomeRecord>& records) {
  CltAccumulator acc;
  for (const auto& r : records) acc.add(r);
  return acc.summary();
}

// Score interval around the debiased estimate, widened by the prediction
// uncertainty term. With every q = 1 it reduces exactly to the classic
// interval.
inline ConfidenceInterval uncertainty_interval(const CltSummary& s,
                                               double alpha) {
  if (s.m == 0) throw DimensionMismatch("uncertainty_interval: empty summary");
  if (!(s.v > 0.0))
    throw DegenerateWeights("uncertainty_interval: non-positive sample size");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("uncertainty_interval: alpha outside (0, 1)");
  const double quant = normal_quantile(1.0 - alpha / 2.0);
  const double q2 = quant * quant;
  const double v = s.v;
  const double den = 1.0 + q2 / v;
  const double center = s.z_bar + q2 / (2.0 * v);
  const double under = s.z_bar * (1.0 - s.z_bar) / v +
                       s.sigma_sq / v * (1.0 + q2 / v) +
                       q2 / (4.0 * v * v);
  const double half = quant * std::sqrt(std::max(under, 0.0));
  return ConfidenceInterval{std::clamp((center - half) / den, 0.0, 1.0),
                            std::clamp((center + half) / den, 0.0, 1.0)};
}

// Algorithm step deciding whether the proxy's verdict is trusted. Inside
// the open band (p_inf, p_sup) nothing is returned and the caller must
// simulate; outside, the verdict is drawn from B(p) and the record stores
// the probability that this verdict agrees with the simulator.
inline std::optional<OutcomeRecord> draw_prediction(
    std::int64_t scenario_id, double p, const DecisionThresholds& thresholds,
    RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0))
    throw DimensionMismatch("draw_prediction: p outside [0, 1]");
  validate_thresholds(thresholds);
  if (p > thresholds.p_inf && p < thresholds.p_sup) return std::nullopt;
  const bool w = rng.uniform01() < p;
  const double q = w ? p : 1.0 - p;
  return OutcomeRecord{scenario_id, w, q, false};
}

}  // namespace certify
