#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "certify/errors.hpp"
#include "certify/intervals.hpp"
#include "certify/log.hpp"
#include "certify/parallel.hpp"
#include "certify/rng.hpp"

namespace certify {

struct SweepConfig {
  std::vector<double> p_values{0.5, 0.75, 0.95};
  std::vector<double> precisions{0.35, 0.30, 0.25, 0.20, 0.15, 0.10, 0.05};
  int repeats = 100;
  double alpha = 0.01;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t max_draws = 10000000;
};

inline void validate_sweep_config(const SweepConfig& cfg) {
  if (cfg.p_values.empty() || cfg.precisions.empty())
    throw ConfigError("sweep: p_values and precisions must be non-empty");
  for (double p : cfg.p_values)
    if (!(p > 0.0 && p < 1.0))
      throw ConfigError("sweep: p_values must be in (0, 1)");
  for (double prec : cfg.precisions)
    if (!(prec > 0.0 && prec <= 1.0))
      throw ConfigError("sweep: precisions must be in (0, 1]");
  if (cfg.repeats < 1) throw ConfigError("sweep: repeats must be >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw ConfigError("sweep: alpha outside (0, 1)");
}

// Number of coin flips a brute-force certification of a synthetic Bernoulli(p)
// needs before the exact binomial interval's half-width drops below the
// requested fraction of the estimated unsafe probability. Checked after every
// flip; the quantile search is warm-started from the previous flip.
inline std::size_t coin_certification_length(double p, double precision,
                                             double alpha, RngStream& rng,
                                             std::size_t max_draws) {
  std::size_t k = 0;
  ConfidenceInterval ci;
  for (std::size_t m = 1; m <= max_draws; ++m) {
    if (rng.uniform01() < p) ++k;
    ci = clopper_pearson(m, k, alpha, ci.p_min, ci.p_max);
    if (0.5 * ci.width() <= precision * (1.0 - ci.midpoint())) return m;
  }
  throw NumericalFailure("sweep: stop rule not reached within max_draws");
}

struct SweepResult {
  std::vector<double> p_values;
  std::vector<double> precisions;
  // mean_counts[i][j] = mean stopping length at precisions[i], p_values[j]
  std::vector<std::vector<double>> mean_counts;
};

inline SweepResult sweep_precision(const SweepConfig& cfg) {
  validate_sweep_config(cfg);
  SweepResult out;
  out.p_values = cfg.p_values;
  out.precisions = cfg.precisions;
  out.mean_counts.assign(cfg.precisions.size(),
                         std::vector<double>(cfg.p_values.size(), 0.0));
  const std::size_t cells = cfg.precisions.size() * cfg.p_values.size();
  parallel_for(cells, cfg.threads, [&](std::size_t cell) {
    const std::size_t i = cell / cfg.p_values.size();
    const std::size_t j = cell % cfg.p_values.size();
    const std::uint64_t cell_seed = mix_seed(cfg.seed, cell, 0);
    double total = 0.0;
    for (int rep = 0; rep < cfg.repeats; ++rep) {
      RngStream rng(cell_seed, static_cast<std::uint64_t>(rep), Stream::Coin);
      total += static_cast<double>(coin_certification_length(
          cfg.p_values[j], cfg.precisions[i], cfg.alpha, rng, cfg.max_draws));
    }
    out.mean_counts[i][j] = total / cfg.repeats;
  });
  return out;
}

namespace detail {

inline std::string probability_column(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", p);
  std::string name = "Probability_";
  for (const char* c = buf; *c; ++c) name += *c == '.' ? '_' : *c;
  return name;
}

}  // namespace detail

// Same layout the reference data ships in: precision in percent, one column
// of mean counts per safety probability.
inline void write_sweep_csv(const std::string& path, const SweepResult& res) {
  std::ofstream out(path);
  if (!out) throw ConfigError("sweep: cannot write " + path);
  out << "precision";
  for (double p : res.p_values) out << ',' << detail::probability_column(p);
  out << "\n";
  for (std::size_t i = 0; i < res.precisions.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", res.precisions[i] * 100.0);
    out << buf;
    for (double v : res.mean_counts[i]) out << ',' << detail::format_double(v);
    out << "\n";
  }
}

}  // namespace certify
