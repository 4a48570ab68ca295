#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "certify/config.hpp"
#include "certify/mvncdf.hpp"
#include "certify/process.hpp"
#include "certify/sweep.hpp"
#include "certify/zone.hpp"

namespace certify {

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  std::optional<std::string> output_dir;
};

namespace detail {

inline std::string resolve_zone_path(const std::string& zone_path,
                                     const std::string& config_path) {
  namespace fs = std::filesystem;
  if (fs::exists(zone_path)) return zone_path;
  const fs::path sibling = fs::path(config_path).parent_path() / zone_path;
  if (fs::exists(sibling)) return sibling.string();
  return zone_path;
}

inline void print_summary_line(const RunSummary& s) {
  std::printf("%-12s p in [%.6f, %.6f]  iterations %zu  simulations %zu\n",
              s.process.c_str(), s.p_min, s.p_max, s.iterations,
              s.simulations);
}

inline void print_comparison(const RunSummary& brute, const RunSummary& proxy,
                             double reference_p_safe) {
  std::printf("\n%-12s %11s %12s %10s %10s %10s %10s\n", "process",
              "iterations", "simulations", "p_min", "p_max", "length",
              "rel_err");
  for (const RunSummary* s : {&brute, &proxy}) {
    char rel[32] = "-";
    if (!std::isnan(reference_p_safe)) {
      const double mid = 0.5 * (s->p_min + s->p_max);
      std::snprintf(rel, sizeof(rel), "%.6f",
                    std::abs(mid - reference_p_safe) / reference_p_safe);
    }
    std::printf("%-12s %11zu %12zu %10.6f %10.6f %10.6f %10s\n",
                s->process.c_str(), s->iterations, s->simulations, s->p_min,
                s->p_max, s->p_max - s->p_min, rel);
  }
}

}  // namespace detail

inline int cmd_run(const std::string& config_path, const std::string& process,
                   const RunOverrides& overrides = {}) {
  RunConfig cfg;
  ZoneConfig zone;
  try {
    if (process != "brute" && process != "proxy" && process != "both")
      throw ConfigError("run: process must be brute, proxy or both");
    std::ifstream in(config_path);
    if (!in) throw ConfigError("run: cannot open " + config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("run: invalid JSON in " + config_path + ": " +
                        e.what());
    }
    if (j.is_object() && j.contains("ptdf")) {
      // a bare zone file runs with default settings
      zone = zone_from_json(j);
      cfg.zone_path = config_path;
    } else {
      cfg = parse_run_config(j);
      zone = load_zone(detail::resolve_zone_path(cfg.zone_path, config_path));
    }
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.budget) cfg.budget = *overrides.budget;
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    validate_run_config(cfg);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    std::optional<RunSummary> brute;
    std::optional<RunSummary> proxy;
    if (process == "brute" || process == "both") {
      const RunResult res = run_brute_force(zone, cfg);
      write_log_csv((dir / "brute_log.csv").string(), res.rows);
      write_summary_json((dir / "brute_summary.json").string(), res.summary);
      detail::print_summary_line(res.summary);
      brute = res.summary;
    }
    if (process == "proxy" || process == "both") {
      const RunResult res = run_proxy_process(zone, cfg);
      write_log_csv((dir / "proxy_log.csv").string(), res.rows);
      write_summary_json((dir / "proxy_summary.json").string(), res.summary);
      detail::print_summary_line(res.summary);
      proxy = res.summary;
    }
    if (brute && proxy)
      detail::print_comparison(*brute, *proxy, cfg.reference_p_safe);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

inline int cmd_sweep(const SweepConfig& cfg, const std::string& out_path) {
  try {
    const SweepResult res = sweep_precision(cfg);
    write_sweep_csv(out_path, res);
    std::printf("wrote %s (%zu precisions x %zu probabilities, %d repeats)\n",
                out_path.c_str(), res.precisions.size(), res.p_values.size(),
                cfg.repeats);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

struct BenchConfig {
  std::vector<int> dims;
  int repeats = 20;
  double accuracy = 1e-3;
  std::uint64_t seed = 1;
  std::size_t max_points = 1000000;
};

// Random full-rank correlation matrix and a mean vector below the limit,
// regenerated per dimension from the bench stream.
inline int cmd_bench_cdf(const BenchConfig& cfg, const std::string& out_path) {
  try {
    if (cfg.dims.empty()) throw ConfigError("bench: dims must be non-empty");
    if (cfg.repeats < 1) throw ConfigError("bench: repeats must be >= 1");
    std::ofstream out(out_path);
    if (!out) throw ConfigError("bench: cannot write " + out_path);
    out << "dimension,seconds\n";
    for (int d : cfg.dims) {
      if (d < 1) throw ConfigError("bench: dims must be >= 1");
      RngStream rng(cfg.seed, static_cast<std::uint64_t>(d), Stream::Bench);
      Eigen::MatrixXd a(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
      Eigen::MatrixXd c = a * a.transpose();
      const Eigen::VectorXd s = c.diagonal().cwiseSqrt();
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) c(i, j) /= s(i) * s(j);
      const OutputCovariance omega(std::move(c));
      RectangleProbQuery query;
      query.mean = Eigen::VectorXd::NullaryExpr(
          d, [&](Eigen::Index) { return 0.8 * rng.uniform01(); });
      query.scale = 0.05;
      query.output_cov = &omega;
      const auto start = std::chrono::steady_clock::now();
      for (int rep = 0; rep < cfg.repeats; ++rep) {
        RngStream shift(cfg.seed, static_cast<std::uint64_t>(rep),
                        Stream::Qmc);
        safe_probability(query, cfg.accuracy, shift, cfg.max_points);
      }
      const std::chrono::duration<double> span =
          std::chrono::steady_clock::now() - start;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6g", span.count() / cfg.repeats);
      out << d << ',' << buf << "\n";
    }
    std::printf("wrote %s (%zu dimensions, %d repeats)\n", out_path.c_str(),
                cfg.dims.size(), cfg.repeats);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

inline int cmd_make_zone(const std::string& out_path, int lines, int nodes,
                         std::uint64_t seed) {
  try {
    const ZoneConfig zone = generate_zone(lines, nodes, seed);
    namespace fs = std::filesystem;
    const fs::path parent = fs::path(out_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    save_zone(zone, out_path);
    std::printf("wrote %s (%d lines, %d nodes, seed %llu)\n", out_path.c_str(),
                lines, nodes, static_cast<unsigned long long>(seed));
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

}  // namespace certify
