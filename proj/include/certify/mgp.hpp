#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "certify/errors.hpp"
#include "certify/sampler.hpp"
#include "certify/zone.hpp"

namespace certify {

struct KernelParams {
  double sigma0_sq = 0.1;   // observation noise variance
  double sigmaf_sq = 0.9;   // signal variance
  double length_scale = 0.5;
};

// Squared-exponential kernel plus a white term that only fires when the two
// arguments are the same draw. Two scenarios at identical coordinates but
// with different ids do not share the noise term.
inline double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                     bool same_draw, const KernelParams& p) {
  if (a.size() != b.size())
    throw DimensionMismatch("kernel: input dimensions differ");
  const double d2 = (a - b).squaredNorm();
  double v = p.sigmaf_sq *
             std::exp(-d2 / (2.0 * p.length_scale * p.length_scale));
  if (same_draw) v += p.sigma0_sq;
  return v;
}

// Shared covariance between the outputs of one prediction. Kept with its
// Cholesky factor and log determinant since every posterior reuses them.
class OutputCovariance {
 public:
  explicit OutputCovariance(Eigen::MatrixXd omega) : omega_(std::move(omega)) {
    if (omega_.rows() == 0 || omega_.rows() != omega_.cols())
      throw DimensionMismatch("output covariance must be square");
    const double scale = omega_.cwiseAbs().maxCoeff();
    if (!((omega_ - omega_.transpose()).cwiseAbs().maxCoeff() <=
          1e-12 * scale))
      throw DimensionMismatch("output covariance must be symmetric");
    llt_.compute(omega_);
    if (llt_.info() != Eigen::Success)
      throw NumericalFailure("output covariance is not positive definite");
    log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  }

  int size() const { return static_cast<int>(omega_.rows()); }
  const Eigen::MatrixXd& matrix() const { return omega_; }
  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
  double log_det() const { return log_det_; }

 private:
  Eigen::MatrixXd omega_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
};

// Correlation proxy for line flows: cosine similarity of PTDF rows, floored
// to be positive definite and rescaled to a unit diagonal.
inline OutputCovariance omega_from_zone(const ZoneConfig& zone) {
  const Eigen::MatrixXd& p = zone.ptdf;
  const int l = zone.num_lines();
  Eigen::VectorXd norms(l);
  for (int i = 0; i < l; ++i) {
    norms(i) = p.row(i).norm();
    if (norms(i) == 0.0)
      throw NumericalFailure("omega_from_zone: zero PTDF row");
  }
  Eigen::MatrixXd omega = (p * p.transpose()).eval();
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) omega(i, j) /= norms(i) * norms(j);
  omega = 0.5 * (omega + omega.transpose()).eval();

  const std::array<double, 5> floors = {0.0, 1e-8, 1e-6, 1e-4, 1e-2};
  for (double lambda : floors) {
    Eigen::MatrixXd cand = omega + lambda * Eigen::MatrixXd::Identity(l, l);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cand);
    if (eig.eigenvalues().minCoeff() >= 1e-8) {
      Eigen::VectorXd d = cand.diagonal().cwiseSqrt();
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) cand(i, j) /= d(i) * d(j);
      return OutputCovariance(std::move(cand));
    }
  }
  throw NumericalFailure("omega_from_zone: could not reach positive definite");
}

// Simulated scenarios with their flow responses, stored as growing matrices
// so neighbour scans stay vectorized.
class TrainingSet {
 public:
  TrainingSet(int input_dim, int output_dim)
      : x_(0, input_dim), y_(0, output_dim) {}

  void add(const Scenario& sc, const Eigen::VectorXd& y) {
    if (sc.x.size() != x_.cols())
      throw DimensionMismatch("training set: input dimension mismatch");
    if (y.size() != y_.cols())
      throw DimensionMismatch("training set: output dimension mismatch");
    if (m_ == x_.rows()) {
      const Eigen::Index cap = std::max<Eigen::Index>(2 * m_, 256);
      x_.conservativeResize(cap, Eigen::NoChange);
      y_.conservativeResize(cap, Eigen::NoChange);
    }
    x_.row(m_) = sc.x.transpose();
    y_.row(m_) = y.transpose();
    ids_.push_back(sc.id);
    ++m_;
  }

  Eigen::Index size() const { return m_; }
  int input_dim() const { return static_cast<int>(x_.cols()); }
  int output_dim() const { return static_cast<int>(y_.cols()); }
  auto inputs() const { return x_.topRows(m_); }
  auto outputs() const { return y_.topRows(m_); }
  std::int64_t id(Eigen::Index i) const {
    return ids_[static_cast<std::size_t>(i)];
  }

 private:
  Eigen::MatrixXd x_, y_;
  std::vector<std::int64_t> ids_;
  Eigen::Index m_ = 0;
};

struct LocalityConfig {
  int max_neighbors = 100;
  double max_distance = 1.0;
};

// Indices of the training points conditioning one prediction: the nearest
// max_neighbors points strictly inside max_distance, ties broken toward the
// older draw. Returned in draw order so the Gram assembly is reproducible.
inline std::vector<Eigen::Index> local_subset(const TrainingSet& train,
                                              const Eigen::VectorXd& x0,
                                              const LocalityConfig& loc) {
  if (loc.max_neighbors < 1)
    throw ConfigError("locality: max_neighbors must be positive");
  if (!(loc.max_distance > 0.0))
    throw ConfigError("locality: max_distance must be > 0");
  const Eigen::Index m = train.size();
  if (m == 0) return {};
  const double d2max = loc.max_distance * loc.max_distance;
  const Eigen::VectorXd d2 =
      (train.inputs().rowwise() - x0.transpose()).rowwise().squaredNorm();
  std::vector<Eigen::Index> idx;
  idx.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i)
    if (d2(i) < d2max) idx.push_back(i);
  const auto closer = [&](Eigen::Index a, Eigen::Index b) {
    if (d2(a) != d2(b)) return d2(a) < d2(b);
    return train.id(a) < train.id(b);
  };
  if (idx.size() > static_cast<std::size_t>(loc.max_neighbors)) {
    std::nth_element(idx.begin(), idx.begin() + loc.max_neighbors, idx.end(),
                     closer);
    idx.resize(static_cast<std::size_t>(loc.max_neighbors));
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace detail {

// Cholesky with escalating diagonal jitter, 1e-10 to 1e-6 relative to the
// mean diagonal.
inline Eigen::LLT<Eigen::MatrixXd> chol_with_jitter(Eigen::MatrixXd gram) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) return llt;
  const double base = gram.diagonal().mean();
  for (double jitter = 1e-10; jitter <= 1.0000001e-6; jitter *= 10.0) {
    Eigen::MatrixXd patched = gram;
    patched.diagonal().array() += jitter * base;
    llt.compute(patched);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NumericalFailure("gram matrix not factorizable after jitter");
}

inline Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x,
                                   const KernelParams& p) {
  const Eigen::Index m = x.rows();
  const double inv = 1.0 / (2.0 * p.length_scale * p.length_scale);
  Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd d2 =
      (-2.0 * x * x.transpose()).eval();
  d2.colwise() += sq;
  d2.rowwise() += sq.transpose();
  Eigen::MatrixXd gram =
      (p.sigmaf_sq * (-d2.array().max(0.0) * inv).exp()).matrix();
  gram.diagonal().array() += p.sigma0_sq;
  return gram;
}

}  // namespace detail

struct PosteriorPrediction {
  Eigen::VectorXd mean;
  double sigma_star = 0.0;  // shared input-side variance, covariance is sigma_star * Omega
};

// Zero-mean matrix normal posterior at x0 conditioned on the given subset.
// mean = k*' Sigma_m^-1 Y, sigma* = k(x0,x0) - k*' Sigma_m^-1 k*.
inline PosteriorPrediction posterior(const TrainingSet& train,
                                     const std::vector<Eigen::Index>& subset,
                                     const Eigen::VectorXd& x0,
                                     const KernelParams& params) {
  const double prior = params.sigmaf_sq + params.sigma0_sq;
  if (subset.empty()) {
    return PosteriorPrediction{Eigen::VectorXd::Zero(train.output_dim()),
                               prior};
  }
  const Eigen::Index k = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd xs(k, train.input_dim());
  Eigen::MatrixXd ys(k, train.output_dim());
  for (Eigen::Index i = 0; i < k; ++i) {
    xs.row(i) = train.inputs().row(subset[static_cast<std::size_t>(i)]);
    ys.row(i) = train.outputs().row(subset[static_cast<std::size_t>(i)]);
  }
  Eigen::MatrixXd gram = detail::gram_matrix(xs, params);
  const double inv = 1.0 / (2.0 * params.length_scale * params.length_scale);
  Eigen::VectorXd ks =
      (params.sigmaf_sq *
       (-(xs.rowwise() - x0.transpose()).rowwise().squaredNorm().array() * inv)
           .exp())
          .matrix();
  const auto llt = detail::chol_with_jitter(std::move(gram));
  const Eigen::VectorXd alpha = llt.solve(ks);
  PosteriorPrediction out;
  out.mean = ys.transpose() * alpha;
  out.sigma_star = std::max(prior - ks.dot(alpha), 0.0);
  return out;
}

// Matrix-variate normal log likelihood of the outputs under the kernel and
// the shared output covariance:
//   -tr(Omega^-1 Y' Sigma^-1 Y)/2 - L log|Sigma|/2 - m log|Omega|/2
//   - mL log(2 pi)/2.
inline double log_marginal_likelihood(const Eigen::MatrixXd& x,
                                      const Eigen::MatrixXd& y,
                                      const KernelParams& params,
                                      const OutputCovariance& omega) {
  if (x.rows() != y.rows())
    throw DimensionMismatch("lml: inputs and outputs disagree");
  if (y.cols() != omega.size())
    throw DimensionMismatch("lml: outputs and omega disagree");
  const double m = static_cast<double>(x.rows());
  const double l = static_cast<double>(y.cols());
  if (x.rows() == 0) return 0.0;
  const auto llt = detail::chol_with_jitter(detail::gram_matrix(x, params));
  const Eigen::MatrixXd b = llt.solve(y);
  const double trace = omega.llt().solve(y.transpose() * b).trace();
  const double log_det_gram =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * trace - 0.5 * l * log_det_gram - 0.5 * m * omega.log_det() -
         0.5 * m * l * std::log(2.0 * M_PI);
}

inline double log_marginal_likelihood(const TrainingSet& train,
                                      const KernelParams& params,
                                      const OutputCovariance& omega) {
  return log_marginal_likelihood(train.inputs(), train.outputs(), params,
                                 omega);
}

struct FitConfig {
  int subsample_cap = 500;
  int max_iterations = 120;
  bool multi_start = true;
};

namespace detail {

constexpr std::array<double, 3> kLogLo = {-13.815510557964274,  // 1e-6
                                          -6.907755278982137,   // 1e-3
                                          -4.605170185988091};  // 1e-2
constexpr std::array<double, 3> kLogHi = {0.0,                  // 1
                                          2.302585092994046,    // 10
                                          2.302585092994046};   // 10

inline KernelParams clamp_log(const Eigen::Vector3d& t) {
  Eigen::Vector3d c;
  for (int i = 0; i < 3; ++i)
    c(i) = std::clamp(t(i), kLogLo[static_cast<std::size_t>(i)],
                      kLogHi[static_cast<std::size_t>(i)]);
  return KernelParams{std::exp(c(0)), std::exp(c(1)), std::exp(c(2))};
}

// Nelder-Mead on the clamped log objective. Small and deterministic; the
// likelihood surface in three log parameters is smooth enough for this.
template <typename F>
Eigen::Vector3d nelder_mead(F&& f, Eigen::Vector3d start, int max_iter) {
  constexpr int n = 3;
  std::array<Eigen::Vector3d, n + 1> pts;
  std::array<double, n + 1> val;
  pts[0] = start;
  for (int i = 0; i < n; ++i) {
    pts[static_cast<std::size_t>(i) + 1] = start;
    pts[static_cast<std::size_t>(i) + 1](i) += 0.4;
  }
  for (std::size_t i = 0; i <= n; ++i) val[i] = f(pts[i]);
  std::array<std::size_t, n + 1> ord = {0, 1, 2, 3};
  for (int it = 0; it < max_iter; ++it) {
    std::sort(ord.begin(), ord.end(),
              [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    if (std::abs(val[ord[n]] - val[ord[0]]) <=
        1e-7 * (1.0 + std::abs(val[ord[0]])))
      break;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) centroid += pts[ord[static_cast<std::size_t>(i)]];
    centroid /= n;
    const Eigen::Vector3d& worst = pts[ord[n]];
    Eigen::Vector3d refl = centroid + (centroid - worst);
    double frefl = f(refl);
    if (frefl < val[ord[0]]) {
      Eigen::Vector3d expd = centroid + 2.0 * (centroid - worst);
      double fexp = f(expd);
      if (fexp < frefl) {
        pts[ord[n]] = expd;
        val[ord[n]] = fexp;
      } else {
        pts[ord[n]] = refl;
        val[ord[n]] = frefl;
      }
    } else if (frefl < val[ord[n - 1]]) {
      pts[ord[n]] = refl;
      val[ord[n]] = frefl;
    } else {
      Eigen::Vector3d contr = centroid + 0.5 * (worst - centroid);
      double fcon = f(contr);
      if (fcon < val[ord[n]]) {
        pts[ord[n]] = contr;
        val[ord[n]] = fcon;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          pts[ord[i]] = pts[ord[0]] + 0.5 * (pts[ord[i]] - pts[ord[0]]);
          val[ord[i]] = f(pts[ord[i]]);
        }
      }
    }
  }
  std::sort(ord.begin(), ord.end(),
            [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
  return pts[ord[0]];
}

}  // namespace detail

// Maximize the marginal likelihood over the kernel parameters on a uniform
// subsample of the training set. Bound constrained in log space:
// sigma0^2 in [1e-6, 1], sigmaf^2 in [1e-3, 10], l in [1e-2, 10].
inline KernelParams fit_hyperparameters(const TrainingSet& train,
                                        const KernelParams& init,
                                        const OutputCovariance& omega,
                                        const FitConfig& cfg = {}) {
  const Eigen::Index m = train.size();
  if (m < 2) throw OptimizationFailed("fit: need at least two points");
  const Eigen::Index cap = std::min<Eigen::Index>(m, cfg.subsample_cap);
  const Eigen::Index stride = (m + cap - 1) / cap;
  std::vector<Eigen::Index> pick;
  for (Eigen::Index i = 0; i < m; i += stride) pick.push_back(i);
  Eigen::MatrixXd xs(static_cast<Eigen::Index>(pick.size()),
                     train.input_dim());
  Eigen::MatrixXd ys(static_cast<Eigen::Index>(pick.size()),
                     train.output_dim());
  for (std::size_t i = 0; i < pick.size(); ++i) {
    xs.row(static_cast<Eigen::Index>(i)) = train.inputs().row(pick[i]);
    ys.row(static_cast<Eigen::Index>(i)) = train.outputs().row(pick[i]);
  }

  const auto objective = [&](const Eigen::Vector3d& t) -> double {
    const KernelParams p = detail::clamp_log(t);
    try {
      return -log_marginal_likelihood(xs, ys, p, omega);
    } catch (const NumericalFailure&) {
      return 1e300;
    }
  };

  std::vector<Eigen::Vector3d> starts;
  starts.emplace_back(std::log(init.sigma0_sq), std::log(init.sigmaf_sq),
                      std::log(init.length_scale));
  if (cfg.multi_start) {
    starts.emplace_back(std::log(0.1), std::log(0.9), std::log(0.15));
    starts.emplace_back(std::log(0.01), std::log(0.5), std::log(1.5));
    starts.emplace_back(std::log(1e-4), std::log(1.0), std::log(5.0));
  }

  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_t = starts.front();
  for (const auto& s : starts) {
    const Eigen::Vector3d t =
        detail::nelder_mead(objective, s, cfg.max_iterations);
    const double v = objective(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  if (!std::isfinite(best))
    throw OptimizationFailed("fit: likelihood not finite at any candidate");
  return detail::clamp_log(best_t);
}

// Bookkeeping wrapper the accelerated process talks to: owns the training
// set, serves local posteriors and refits the kernel on a fixed cadence.
class MgpProxy {
 public:
  MgpProxy(int input_dim, KernelParams init, OutputCovariance omega,
           LocalityConfig locality, int refit_period_batches,
           FitConfig fit_cfg = {})
      : train_(input_dim, omega.size()),
        params_(init),
        omega_(std::move(omega)),
        locality_(locality),
        refit_period_(refit_period_batches),
        fit_cfg_(fit_cfg) {
    if (refit_period_ < 1)
      throw ConfigError("mgp: refit period must be positive");
  }

  PosteriorPrediction predict(const Eigen::VectorXd& x0) const {
    return posterior(train_, local_subset(train_, x0, locality_), x0,
                     params_);
  }

  void absorb(const Scenario& sc, const Eigen::VectorXd& y) {
    train_.add(sc, y);
  }

  void end_batch() {
    ++batches_;
    if (batches_ % refit_period_ != 0 || train_.size() < 5) return;
    try {
      FitConfig cfg = fit_cfg_;
      cfg.multi_start = !fitted_once_;  // warm starts after the first fit
      params_ = fit_hyperparameters(train_, params_, omega_, cfg);
      fitted_once_ = true;
    } catch (const OptimizationFailed&) {
      // keep the previous parameters
    }
  }

  const TrainingSet& training() const { return train_; }
  const KernelParams& params() const { return params_; }
  const OutputCovariance& omega() const { return omega_; }

 private:
  TrainingSet train_;
  KernelParams params_;
  OutputCovariance omega_;
  LocalityConfig locality_;
  int refit_period_;
  FitConfig fit_cfg_;
  int batches_ = 0;
  bool fitted_once_ = false;
};

}  // namespace certify
