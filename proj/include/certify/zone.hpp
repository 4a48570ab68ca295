#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "certify/errors.hpp"
#include "certify/rng.hpp"

namespace certify {

// Static description of a transmission zone: line sensitivities to nodal
// injections plus the knobs of the noisy simulator built on top of them.
// Line limits are normalized to 1.
struct ZoneConfig {
  Eigen::MatrixXd ptdf;  // lines x nodes
  double noise_sigma = 0.01;
  int history_size = 500;
  double eta = 0.25;
  std::uint64_t seed = 0;

  int num_lines() const { return static_cast<int>(ptdf.rows()); }
  int num_nodes() const { return static_cast<int>(ptdf.cols()); }
};

inline void validate_zone(const ZoneConfig& zone) {
  if (zone.ptdf.rows() < 1 || zone.ptdf.cols() < 1)
    throw ConfigError("zone: ptdf must be a non-empty matrix");
  if (!(zone.noise_sigma >= 0.0))
    throw ConfigError("zone: noise_sigma must be >= 0");
  if (zone.history_size < 1)
    throw ConfigError("zone: history_size must be positive");
  if (!(zone.eta > 0.0)) throw ConfigError("zone: eta must be > 0");
}

inline ZoneConfig zone_from_json(const nlohmann::json& j) {
  ZoneConfig zone;
  try {
    const auto& rows = j.at("ptdf");
    if (!rows.is_array() || rows.empty())
      throw ConfigError("zone: ptdf must be a non-empty array of rows");
    const std::size_t cols = rows.at(0).size();
    zone.ptdf.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows.at(r).size() != cols)
        throw ConfigError("zone: ptdf rows must have equal length");
      for (std::size_t c = 0; c < cols; ++c)
        zone.ptdf(static_cast<Eigen::Index>(r),
                  static_cast<Eigen::Index>(c)) = rows.at(r).at(c).get<double>();
    }
    zone.noise_sigma = j.at("noise_sigma").get<double>();
    zone.history_size = j.at("history_size").get<int>();
    zone.eta = j.at("eta").get<double>();
    zone.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("zone: malformed JSON: ") + e.what());
  }
  validate_zone(zone);
  return zone;
}

inline nlohmann::json zone_to_json(const ZoneConfig& zone) {
  nlohmann::ordered_json j;
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < zone.ptdf.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < zone.ptdf.cols(); ++c)
      row.push_back(zone.ptdf(r, c));
    rows.push_back(std::move(row));
  }
  j["ptdf"] = std::move(rows);
  j["noise_sigma"] = zone.noise_sigma;
  j["history_size"] = zone.history_size;
  j["eta"] = zone.eta;
  j["seed"] = zone.seed;
  return j;
}

inline ZoneConfig load_zone(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("zone: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("zone: cannot parse " + path + ": " + e.what());
  }
  return zone_from_json(j);
}

inline void save_zone(const ZoneConfig& zone, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("zone: cannot write " + path);
  out << zone_to_json(zone).dump(2) << "\n";
}

// Draw a synthetic zone with PTDF entries uniform in [lo, hi).
inline ZoneConfig generate_zone(int lines, int nodes, std::uint64_t ptdf_seed,
                                double lo = 0.05, double hi = 0.35) {
  if (lines < 1 || nodes < 1)
    throw ConfigError("zone: lines and nodes must be positive");
  if (!(lo < hi)) throw ConfigError("zone: need lo < hi for ptdf range");
  ZoneConfig zone;
  zone.ptdf.resize(lines, nodes);
  RngStream rng(ptdf_seed, 0, Stream::ZoneGen);
  for (int r = 0; r < lines; ++r)
    for (int c = 0; c < nodes; ++c)
      zone.ptdf(r, c) = lo + (hi - lo) * rng.uniform01();
  zone.seed = ptdf_seed;
  return zone;
}

}  // namespace certify
