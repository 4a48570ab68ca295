#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "certify/errors.hpp"
#include "certify/rng.hpp"
#include "certify/sampler.hpp"
#include "certify/zone.hpp"

namespace certify {

// Safety margin the operator leaves below the limit when curtailing.
constexpr double kCurtailMargin = 1e-3;

struct FlowResponse {
  Eigen::VectorXd flows;
  double beta = 1.0;
};

// Past operating points the dispatcher consults: total injection of each
// historical scenario and the curtailment factor that was applied to it.
struct CurtailmentHistory {
  std::vector<double> totals;
  std::vector<double> betas;

  std::size_t size() const { return totals.size(); }
};

// Uncurtailed line flows. Measurement noise is one epsilon per node shared
// by every line, so r_l = sum_n (ptdf_ln + eps_n) x_n.
inline Eigen::VectorXd raw_flows(const ZoneConfig& zone,
                                 const Eigen::VectorXd& x, RngStream& rng) {
  if (x.size() != zone.num_nodes())
    throw DimensionMismatch("raw_flows: scenario dimension != zone nodes");
  Eigen::VectorXd eps(x.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i)
    eps(i) = zone.noise_sigma * rng.normal();
  Eigen::VectorXd r = zone.ptdf * x;
  r.array() += eps.dot(x);
  return r;
}

// Factor that scales the worst line to just below its limit; 1 when nothing
// overflows.
inline double curtailment_for(const Eigen::VectorXd& raw) {
  const double worst = raw.maxCoeff();
  if (worst <= 0.0) return 1.0;
  return std::min(1.0, (1.0 - kCurtailMargin) / worst);
}

inline CurtailmentHistory build_history(const ZoneConfig& zone,
                                        const Sampler& sampler) {
  CurtailmentHistory hist;
  hist.totals.reserve(static_cast<std::size_t>(zone.history_size));
  hist.betas.reserve(static_cast<std::size_t>(zone.history_size));
  for (int j = 0; j < zone.history_size; ++j) {
    RngStream draw(zone.seed, static_cast<std::uint64_t>(j),
                   Stream::HistoryScenario);
    const Scenario sc = sampler.sample_with_stream(j, draw);
    RngStream sim(zone.seed, static_cast<std::uint64_t>(j),
                  Stream::HistorySim);
    const Eigen::VectorXd r = raw_flows(zone, sc.x, sim);
    hist.totals.push_back(sc.x.sum());
    hist.betas.push_back(curtailment_for(r));
  }
  return hist;
}

// The operator reuses the curtailment of a uniformly chosen historical
// scenario with similar total injection, or does nothing when none is close.
inline double select_beta(const CurtailmentHistory& hist, double total,
                          double eta, RngStream& rng) {
  std::vector<std::size_t> cand;
  for (std::size_t j = 0; j < hist.size(); ++j)
    if (std::abs(hist.totals[j] - total) < eta) cand.push_back(j);
  if (cand.empty()) return 1.0;
  return hist.betas[cand[rng.pick(cand.size())]];
}

inline FlowResponse simulate(const ZoneConfig& zone,
                             const CurtailmentHistory& hist,
                             const Eigen::VectorXd& x, RngStream& rng) {
  Eigen::VectorXd r = raw_flows(zone, x, rng);
  const double beta = select_beta(hist, x.sum(), zone.eta, rng);
  r *= beta;
  return FlowResponse{std::move(r), beta};
}

// Safe iff no line exceeds its normalized limit.
inline bool classify(const Eigen::VectorXd& flows) {
  return (flows.array() <= 1.0).all();
}

}  // namespace certify
