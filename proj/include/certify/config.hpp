#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "certify/errors.hpp"
#include "certify/intervals.hpp"
#include "certify/mgp.hpp"

namespace certify {

enum class StopRule { Budget, IntervalWidth };

struct SamplerSettings {
  double std_dev = 0.5;
  double corr = 0.5;
  std::size_t max_rejections = 100000;
};

struct MgpSettings {
  KernelParams init;
  LocalityConfig locality;
  std::size_t refit_period = 10;  // batches between hyperparameter refits
  std::size_t fit_subsample = 500;
};

struct QmcSettings {
  double accuracy = 1e-4;
  std::size_t max_points = 1000000;
};

struct RunConfig {
  std::string zone_path;
  double alpha = 0.05;
  std::size_t budget = 20000;  // simulator calls allowed
  std::size_t batch_size = 100;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  unsigned threads = 1;
  bool record_timing = false;
  StopRule stop = StopRule::Budget;
  double width_target = 0.0;
  std::size_t max_iterations = 0;  // 0 = unbounded
  double reference_p_safe = std::numeric_limits<double>::quiet_NaN();
  SamplerSettings sampler;
  DecisionThresholds thresholds;
  MgpSettings mgp;
  QmcSettings qmc;
};

inline void validate_run_config(const RunConfig& cfg) {
  if (cfg.zone_path.empty()) throw ConfigError("config: zone is required");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw ConfigError("config: alpha must be in (0, 1)");
  if (cfg.budget < 1) throw ConfigError("config: budget must be >= 1");
  if (cfg.batch_size < 1)
    throw ConfigError("config: batch_size must be >= 1");
  if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");
  if (cfg.stop == StopRule::IntervalWidth &&
      !(cfg.width_target > 0.0 && cfg.width_target < 1.0))
    throw ConfigError("config: width_target must be in (0, 1)");
  if (!(cfg.sampler.std_dev > 0.0))
    throw ConfigError("config: sampler.std_dev must be > 0");
  if (!(cfg.sampler.corr >= 0.0 && cfg.sampler.corr < 1.0))
    throw ConfigError("config: sampler.corr must be in [0, 1)");
  if (cfg.sampler.max_rejections < 1)
    throw ConfigError("config: sampler.max_rejections must be >= 1");
  validate_thresholds(cfg.thresholds);
  if (!(cfg.mgp.init.sigma0_sq > 0.0))
    throw ConfigError("config: mgp.sigma0_sq must be > 0");
  if (!(cfg.mgp.init.sigmaf_sq > 0.0))
    throw ConfigError("config: mgp.sigmaf_sq must be > 0");
  if (!(cfg.mgp.init.length_scale > 0.0))
    throw ConfigError("config: mgp.length_scale must be > 0");
  if (cfg.mgp.locality.max_neighbors < 1)
    throw ConfigError("config: mgp.max_neighbors must be >= 1");
  if (!(cfg.mgp.locality.max_distance > 0.0))
    throw ConfigError("config: mgp.max_distance must be > 0");
  if (cfg.mgp.refit_period < 1)
    throw ConfigError("config: mgp.refit_period must be >= 1");
  if (cfg.mgp.fit_subsample < 2)
    throw ConfigError("config: mgp.fit_subsample must be >= 2");
  if (!(cfg.qmc.accuracy > 0.0))
    throw ConfigError("config: qmc.accuracy must be > 0");
  if (cfg.qmc.max_points < 1000)
    throw ConfigError("config: qmc.max_points must be >= 1000");
  if (!std::isnan(cfg.reference_p_safe) &&
      !(cfg.reference_p_safe > 0.0 && cfg.reference_p_safe < 1.0))
    throw ConfigError("config: reference_p_safe must be in (0, 1)");
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                const std::vector<std::string>& known,
                                const std::string& where) {
  for (const auto& item : j.items()) {
    bool found = false;
    for (const auto& k : known)
      if (item.key() == k) {
        found = true;
        break;
      }
    if (!found)
      throw ConfigError("config: unknown key \"" + item.key() + "\" in " +
                        where);
  }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: bad value for \"") + key + "\"");
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: root must be an object");
  detail::reject_unknown_keys(
      j,
      {"zone", "alpha", "budget", "batch_size", "seed", "output_dir",
       "threads", "record_timing", "stop", "max_iterations",
       "reference_p_safe", "sampler", "thresholds", "mgp", "qmc"},
      "root");
  RunConfig cfg;
  detail::read_field(j, "zone", cfg.zone_path);
  detail::read_field(j, "alpha", cfg.alpha);
  detail::read_field(j, "budget", cfg.budget);
  detail::read_field(j, "batch_size", cfg.batch_size);
  detail::read_field(j, "seed", cfg.seed);
  detail::read_field(j, "output_dir", cfg.output_dir);
  detail::read_field(j, "threads", cfg.threads);
  detail::read_field(j, "record_timing", cfg.record_timing);
  detail::read_field(j, "max_iterations", cfg.max_iterations);
  detail::read_field(j, "reference_p_safe", cfg.reference_p_safe);
  if (j.contains("stop")) {
    const auto& s = j.at("stop");
    detail::reject_unknown_keys(s, {"rule", "width_target"}, "stop");
    std::string rule = "budget";
    detail::read_field(s, "rule", rule);
    if (rule == "budget") {
      cfg.stop = StopRule::Budget;
    } else if (rule == "interval_width") {
      cfg.stop = StopRule::IntervalWidth;
    } else {
      throw ConfigError("config: stop.rule must be budget or interval_width");
    }
    detail::read_field(s, "width_target", cfg.width_target);
  }
  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    detail::reject_unknown_keys(s, {"std_dev", "corr", "max_rejections"},
                                "sampler");
    detail::read_field(s, "std_dev", cfg.sampler.std_dev);
    detail::read_field(s, "corr", cfg.sampler.corr);
    detail::read_field(s, "max_rejections", cfg.sampler.max_rejections);
  }
  if (j.contains("thresholds")) {
    const auto& s = j.at("thresholds");
    detail::reject_unknown_keys(s, {"p_inf", "p_sup"}, "thresholds");
    detail::read_field(s, "p_inf", cfg.thresholds.p_inf);
    detail::read_field(s, "p_sup", cfg.thresholds.p_sup);
  }
  if (j.contains("mgp")) {
    const auto& s = j.at("mgp");
    detail::reject_unknown_keys(
        s,
        {"sigma0_sq", "sigmaf_sq", "length_scale", "max_neighbors",
         "max_distance", "refit_period", "fit_subsample"},
        "mgp");
    detail::read_field(s, "sigma0_sq", cfg.mgp.init.sigma0_sq);
    detail::read_field(s, "sigmaf_sq", cfg.mgp.init.sigmaf_sq);
    detail::read_field(s, "length_scale", cfg.mgp.init.length_scale);
    detail::read_field(s, "max_neighbors", cfg.mgp.locality.max_neighbors);
    detail::read_field(s, "max_distance", cfg.mgp.locality.max_distance);
    detail::read_field(s, "refit_period", cfg.mgp.refit_period);
    detail::read_field(s, "fit_subsample", cfg.mgp.fit_subsample);
  }
  if (j.contains("qmc")) {
    const auto& s = j.at("qmc");
    detail::reject_unknown_keys(s, {"accuracy", "max_points"}, "qmc");
    detail::read_field(s, "accuracy", cfg.qmc.accuracy);
    detail::read_field(s, "max_points", cfg.qmc.max_points);
  }
  validate_run_config(cfg);
  return cfg;
}

inline nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["zone"] = cfg.zone_path;
  j["alpha"] = cfg.alpha;
  j["budget"] = cfg.budget;
  j["batch_size"] = cfg.batch_size;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;
  j["record_timing"] = cfg.record_timing;
  j["stop"]["rule"] =
      cfg.stop == StopRule::Budget ? "budget" : "interval_width";
  if (cfg.stop == StopRule::IntervalWidth)
    j["stop"]["width_target"] = cfg.width_target;
  if (cfg.max_iterations > 0) j["max_iterations"] = cfg.max_iterations;
  if (!std::isnan(cfg.reference_p_safe))
    j["reference_p_safe"] = cfg.reference_p_safe;
  j["sampler"]["std_dev"] = cfg.sampler.std_dev;
  j["sampler"]["corr"] = cfg.sampler.corr;
  j["sampler"]["max_rejections"] = cfg.sampler.max_rejections;
  j["thresholds"]["p_inf"] = cfg.thresholds.p_inf;
  j["thresholds"]["p_sup"] = cfg.thresholds.p_sup;
  j["mgp"]["sigma0_sq"] = cfg.mgp.init.sigma0_sq;
  j["mgp"]["sigmaf_sq"] = cfg.mgp.init.sigmaf_sq;
  j["mgp"]["length_scale"] = cfg.mgp.init.length_scale;
  j["mgp"]["max_neighbors"] = cfg.mgp.locality.max_neighbors;
  j["mgp"]["max_distance"] = cfg.mgp.locality.max_distance;
  j["mgp"]["refit_period"] = cfg.mgp.refit_period;
  j["mgp"]["fit_subsample"] = cfg.mgp.fit_subsample;
  j["qmc"]["accuracy"] = cfg.qmc.accuracy;
  j["qmc"]["max_points"] = cfg.qmc.max_points;
  return j;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: invalid JSON in " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace certify
