#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "certify/config.hpp"
#include "certify/intervals.hpp"
#include "certify/log.hpp"
#include "certify/mgp.hpp"
#include "certify/mvncdf.hpp"
#include "certify/netsim.hpp"
#include "certify/parallel.hpp"
#include "certify/rng.hpp"
#include "certify/sampler.hpp"
#include "certify/zone.hpp"

namespace certify {

struct RunResult {
  std::vector<IterationRow> rows;
  RunSummary summary;
};

namespace detail {

// The two processes draw from unrelated scenario streams even under the
// same run seed.
constexpr std::uint64_t kBruteSalt = 0x62727574ULL;
constexpr std::uint64_t kProxySalt = 0x70727873ULL;

class WallClock {
 public:
  explicit WallClock(bool enabled) : enabled_(enabled) {}

  double elapsed() const {
    if (!enabled_) return 0.0;
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(now - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

inline Sampler make_scenario_sampler(const ZoneConfig& zone,
                                     const RunConfig& cfg,
                                     std::uint64_t process_seed) {
  SamplerConfig sc;
  sc.node_covariance = exponential_node_covariance(
      zone.num_nodes(), cfg.sampler.std_dev, cfg.sampler.corr);
  sc.seed = process_seed;
  sc.max_rejections = static_cast<int>(cfg.sampler.max_rejections);
  return Sampler(std::move(sc));
}

inline bool width_reached(const RunConfig& cfg, const ConfidenceInterval& ci) {
  return cfg.stop == StopRule::IntervalWidth && ci.width() <= cfg.width_target;
}

}  // namespace detail

// Baseline estimator: simulate every drawn scenario and track the score
// interval of the observed safe fraction.
inline RunResult run_brute_force(const ZoneConfig& zone, const RunConfig& cfg) {
  validate_zone(zone);
  validate_run_config(cfg);
  const std::uint64_t process_seed = mix_seed(cfg.seed, detail::kBruteSalt, 0);
  const Sampler sampler = detail::make_scenario_sampler(zone, cfg, process_seed);
  const CurtailmentHistory hist = build_history(zone, sampler);
  const detail::WallClock clock(cfg.record_timing);

  RunResult out;
  out.rows.reserve(cfg.budget);
  std::size_t safe = 0;
  std::size_t done = 0;
  bool stop = false;
  std::vector<std::uint8_t> w_batch;
  while (!stop && done < cfg.budget) {
    std::size_t count = std::min(cfg.batch_size, cfg.budget - done);
    if (cfg.max_iterations > 0)
      count = std::min(count, cfg.max_iterations - done);
    if (count == 0) break;
    w_batch.assign(count, 0);
    parallel_for(count, cfg.threads, [&](std::size_t k) {
      const std::int64_t id = static_cast<std::int64_t>(done + k);
      const Scenario sc = sampler.sample(id);
      RngStream sim(process_seed, static_cast<std::uint64_t>(id),
                    Stream::Simulate);
      w_batch[k] = classify(simulate(zone, hist, sc.x, sim).flows) ? 1 : 0;
    });
    for (std::size_t k = 0; k < count; ++k) {
      ++done;
      safe += w_batch[k];
      const ConfidenceInterval ci = classic_interval(done, safe, cfg.alpha);
      IterationRow row;
      row.scenario_id = static_cast<std::int64_t>(done - 1);
      row.simulated = true;
      row.p_min = ci.p_min;
      row.p_max = ci.p_max;
      row.n_sims = done;
      row.elapsed_s = clock.elapsed();
      out.rows.push_back(row);
      if (detail::width_reached(cfg, ci) ||
          (cfg.max_iterations > 0 && done >= cfg.max_iterations)) {
        stop = true;
        break;
      }
    }
  }

  out.summary.process = "brute_force";
  if (!out.rows.empty()) {
    out.summary.p_min = out.rows.back().p_min;
    out.summary.p_max = out.rows.back().p_max;
  }
  out.summary.iterations = done;
  out.summary.simulations = done;
  out.summary.alpha = cfg.alpha;
  out.summary.seed = cfg.seed;
  return out;
}

namespace detail {

struct ProxySlot {
  Scenario scenario;
  double p_pred = 0.0;
  double sigma_star = 0.0;
  double entropy = 0.0;
  std::optional<OutcomeRecord> predicted;
  OutcomeRecord simulated_record;
  Eigen::VectorXd flows;
};

}  // namespace detail

// Accelerated estimator: a shared-covariance GP trained on the simulated
// flows predicts the safety probability of each new scenario. Confident
// predictions are recorded as weighted coin flips and only the uncertain
// scenarios spend simulator budget. The run ends when a simulation is
// required and the budget is exhausted.
inline RunResult run_proxy_process(const ZoneConfig& zone,
                                   const RunConfig& cfg) {
  validate_zone(zone);
  validate_run_config(cfg);
  const std::uint64_t process_seed = mix_seed(cfg.seed, detail::kProxySalt, 0);
  const Sampler sampler = detail::make_scenario_sampler(zone, cfg, process_seed);
  const CurtailmentHistory hist = build_history(zone, sampler);
  FitConfig fit_cfg;
  fit_cfg.subsample_cap = static_cast<int>(cfg.mgp.fit_subsample);
  MgpProxy proxy(zone.num_nodes(), cfg.mgp.init, omega_from_zone(zone),
                 cfg.mgp.locality, static_cast<int>(cfg.mgp.refit_period),
                 fit_cfg);
  const detail::WallClock clock(cfg.record_timing);

  RunResult out;
  CltAccumulator acc;
  std::size_t iterations = 0;
  std::size_t n_sims = 0;
  bool stop = false;
  std::vector<detail::ProxySlot> slots;
  while (!stop) {
    std::size_t count = cfg.batch_size;
    if (cfg.max_iterations > 0)
      count = std::min(count, cfg.max_iterations - iterations);
    if (count == 0) break;
    slots.assign(count, detail::ProxySlot{});
    parallel_for(count, cfg.threads, [&](std::size_t k) {
      const std::int64_t id = static_cast<std::int64_t>(iterations + k);
      detail::ProxySlot& slot = slots[k];
      slot.scenario = sampler.sample(id);
      const PosteriorPrediction pred = proxy.predict(slot.scenario.x);
      RectangleProbQuery query;
      query.mean = pred.mean;
      query.scale = pred.sigma_star;
      query.output_cov = &proxy.omega();
      RngStream qmc(process_seed, static_cast<std::uint64_t>(id), Stream::Qmc);
      slot.p_pred =
          safe_probability(query, cfg.qmc.accuracy, qmc, cfg.qmc.max_points)
              .probability;
      slot.sigma_star = pred.sigma_star;
      slot.entropy = prediction_entropy(slot.p_pred);
      RngStream coin(process_seed, static_cast<std::uint64_t>(id),
                     Stream::Prediction);
      slot.predicted =
          draw_prediction(id, slot.p_pred, cfg.thresholds, coin);
      if (!slot.predicted) {
        RngStream sim(process_seed, static_cast<std::uint64_t>(id),
                      Stream::Simulate);
        const FlowResponse res = simulate(zone, hist, slot.scenario.x, sim);
        slot.simulated_record =
            OutcomeRecord{id, classify(res.flows), 1.0, true};
        slot.flows = res.flows;
      }
    });

    std::size_t consumed = 0;
    for (std::size_t k = 0; k < count; ++k) {
      const detail::ProxySlot& slot = slots[k];
      const bool needs_sim = !slot.predicted.has_value();
      if (needs_sim && n_sims >= cfg.budget) {
        stop = true;
        break;
      }
      const OutcomeRecord& rec =
          needs_sim ? slot.simulated_record : *slot.predicted;
      acc.add(rec);
      if (needs_sim) ++n_sims;
      ++iterations;
      ++consumed;
      const ConfidenceInterval ci =
          uncertainty_interval(acc.summary(), cfg.alpha);
      IterationRow row;
      row.scenario_id = rec.scenario_id;
      row.p_pred = slot.p_pred;
      row.sigma_star = slot.sigma_star;
      row.entropy = slot.entropy;
      row.simulated = needs_sim;
      row.p_min = ci.p_min;
      row.p_max = ci.p_max;
      row.n_sims = n_sims;
      row.elapsed_s = clock.elapsed();
      out.rows.push_back(row);
      if (detail::width_reached(cfg, ci)) {
        stop = true;
        break;
      }
    }
    for (std::size_t k = 0; k < consumed; ++k) {
      const detail::ProxySlot& slot = slots[k];
      if (!slot.predicted)
        proxy.absorb(slot.scenario, slot.flows);
    }
    proxy.end_batch();
    if (cfg.max_iterations > 0 && iterations >= cfg.max_iterations) break;
  }

  out.summary.process = "proxy";
  if (!out.rows.empty()) {
    out.summary.p_min = out.rows.back().p_min;
    out.summary.p_max = out.rows.back().p_max;
  }
  out.summary.iterations = iterations;
  out.summary.simulations = n_sims;
  out.summary.alpha = cfg.alpha;
  out.summary.seed = cfg.seed;
  return out;
}

// Trailing mean over a growing window, full width once enough points exist.
inline std::vector<double> moving_average(const std::vector<double>& v,
                                          std::size_t window) {
  if (window < 1) throw ConfigError("moving_average: window must be >= 1");
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sum += v[i];
    if (i >= window) sum -= v[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

}  // namespace certify
