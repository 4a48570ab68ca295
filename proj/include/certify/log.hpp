#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "certify/errors.hpp"

namespace certify {

// One line of the per-iteration log. NaN in the proxy columns means the
// field does not apply (brute force rows) and is written as an empty cell.
struct IterationRow {
  std::int64_t scenario_id = 0;
  double p_pred = std::numeric_limits<double>::quiet_NaN();
  double sigma_star = std::numeric_limits<double>::quiet_NaN();
  double entropy = std::numeric_limits<double>::quiet_NaN();
  bool simulated = true;
  double p_min = 0.0;
  double p_max = 1.0;
  std::size_t n_sims = 0;
  double elapsed_s = 0.0;
};

inline constexpr const char* kLogHeader =
    "scenario_id,p_pred,sigma_star,entropy,simulated,p_min,p_max,n_sims,"
    "elapsed_s";

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_optional(double v) {
  return std::isnan(v) ? std::string() : format_double(v);
}

inline double parse_optional(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

}  // namespace detail

inline void write_log_csv(const std::string& path,
                          const std::vector<IterationRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("log: cannot write " + path);
  out << kLogHeader << "\n";
  for (const auto& r : rows) {
    out << r.scenario_id << ',' << detail::format_optional(r.p_pred) << ','
        << detail::format_optional(r.sigma_star) << ','
        << detail::format_optional(r.entropy) << ',' << (r.simulated ? 1 : 0)
        << ',' << detail::format_double(r.p_min) << ','
        << detail::format_double(r.p_max) << ',' << r.n_sims << ','
        << detail::format_double(r.elapsed_s) << "\n";
  }
}

inline std::vector<IterationRow> read_log_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("log: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kLogHeader)
    throw ConfigError("log: unexpected header in " + path);
  std::vector<IterationRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 9) cells.emplace_back();
    IterationRow r;
    r.scenario_id = std::stoll(cells[0]);
    r.p_pred = detail::parse_optional(cells[1]);
    r.sigma_star = detail::parse_optional(cells[2]);
    r.entropy = detail::parse_optional(cells[3]);
    r.simulated = cells[4] == "1";
    r.p_min = std::stod(cells[5]);
    r.p_max = std::stod(cells[6]);
    r.n_sims = static_cast<std::size_t>(std::stoull(cells[7]));
    r.elapsed_s = std::stod(cells[8]);
    rows.push_back(r);
  }
  return rows;
}

struct RunSummary {
  std::string process;
  double p_min = 0.0;
  double p_max = 1.0;
  std::size_t iterations = 0;
  std::size_t simulations = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

inline void write_summary_json(const std::string& path,
                               const RunSummary& summary) {
  nlohmann::ordered_json j;
  j["process"] = summary.process;
  j["p_min"] = summary.p_min;
  j["p_max"] = summary.p_max;
  j["iterations"] = summary.iterations;
  j["simulations"] = summary.simulations;
  j["alpha"] = summary.alpha;
  j["seed"] = summary.seed;
  std::ofstream out(path);
  if (!out) throw ConfigError("summary: cannot write " + path);
  out << j.dump(2) << "\n";
}

inline RunSummary read_summary_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("summary: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
    RunSummary s;
    s.process = j.at("process").get<std::string>();
    s.p_min = j.at("p_min").get<double>();
    s.p_max = j.at("p_max").get<double>();
    s.iterations = j.at("iterations").get<std::size_t>();
    s.simulations = j.at("simulations").get<std::size_t>();
    s.alpha = j.at("alpha").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("summary: malformed " + path + ": " + e.what());
  }
}

}  // namespace certify
