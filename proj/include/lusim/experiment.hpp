#ifndef LUSIM_EXPERIMENT_HPP
#define LUSIM_EXPERIMENT_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lusim/analytic.hpp"
#include "lusim/sim.hpp"

namespace lusim {

enum class Metric { PrrPerCheckpoint, TotalPower, PowerDifference };
enum class SweptParam { LambdaIos, LambdaCcrr, LambdaCsa, TimerTp };

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::PrrPerCheckpoint: return "PRR_PER_CHECKPOINT";
    case Metric::TotalPower: return "TOTAL_POWER";
    case Metric::PowerDifference: return "POWER_DIFFERENCE";
  }
  return "?";
}

inline Metric parse_metric(std::string_view s) {
  if (s == "PRR_PER_CHECKPOINT") return Metric::PrrPerCheckpoint;
  if (s == "TOTAL_POWER") return Metric::TotalPower;
  if (s == "POWER_DIFFERENCE") return Metric::PowerDifference;
  throw std::invalid_argument("unknown metric '" + std::string(s) + "'");
}

inline const char* to_string(SweptParam p) {
  switch (p) {
    case SweptParam::LambdaIos: return "lambda_ios";
    case SweptParam::LambdaCcrr: return "lambda_ccrr";
    case SweptParam::LambdaCsa: return "lambda_csa";
    case SweptParam::TimerTp: return "t_p";
  }
  return "?";
}

inline SweptParam parse_swept_param(std::string_view s) {
  if (s == "lambda_ios") return SweptParam::LambdaIos;
  if (s == "lambda_ccrr") return SweptParam::LambdaCcrr;
  if (s == "lambda_csa") return SweptParam::LambdaCsa;
  if (s == "t_p") return SweptParam::TimerTp;
  throw std::invalid_argument("unknown swept parameter '" + std::string(s) + "'");
}

/// One parameter sweep: a strictly increasing grid applied to a fixed base
/// scenario, with seeded replications per grid point.
struct SweepSpec {
  SweptParam param = SweptParam::LambdaIos;
  std::vector<double> values;
  ScenarioConfig fixed{};
  int replications = 10;
  double horizon = 1e5;

  void validate() const {
    detail::require(!values.empty(), "sweep values must be non-empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v = values[i];
      detail::require(std::isfinite(v), "sweep values must be finite");
      if (param == SweptParam::TimerTp)
        detail::require(v > 0, "swept t_p values must be > 0");
      else
        detail::require(v >= 0, "swept rate values must be >= 0");
      if (i > 0) detail::require(values[i - 1] < v, "sweep values must be strictly increasing");
    }
    detail::require(replications >= 1, "replications must be >= 1");
    detail::require(std::isfinite(horizon) && horizon > 0, "horizon must be finite and > 0");
    fixed.validate();
  }
};

inline ScenarioConfig apply_swept_param(ScenarioConfig cfg, SweptParam param, double value) {
  switch (param) {
    case SweptParam::LambdaIos:
      cfg.rates = RateConfig(value, cfg.rates.lambda_ccrr, cfg.rates.lambda_csa);
      break;
    case SweptParam::LambdaCcrr:
      cfg.rates = RateConfig(cfg.rates.lambda_ios, value, cfg.rates.lambda_csa);
      break;
    case SweptParam::LambdaCsa:
      cfg.rates = RateConfig(cfg.rates.lambda_ios, cfg.rates.lambda_ccrr, value);
      break;
    case SweptParam::TimerTp:
      cfg.timer = TimerParams(value);
      break;
  }
  return cfg;
}

/// One sweep-table row: closed-form value next to the simulated estimate.
struct ComparisonRow {
  double param = 0;
  std::string policy;
  double analytic = std::numeric_limits<double>::quiet_NaN();
  double sim_mean = std::numeric_limits<double>::quiet_NaN();
  double sim_stderr = 0;
  double rel_err = std::numeric_limits<double>::quiet_NaN();
};

// ---- simulated metric estimators ------------------------------------------

inline double sim_prr_per_checkpoint(const SimReport& r) {
  if (r.checkpoint_count == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(r.prr_count) / static_cast<double>(r.checkpoint_count);
}

/// Long-run per-checkpoint power average with the same structure as the
/// closed-form total: session and capability-update shares per update-event
/// arrival, periodic share per timer-deferring checkpoint. The device-local
/// access cost stays outside the estimate, matching the closed form's scope.
inline double sim_total_power_per_checkpoint(const SimReport& r, const CostModel& costs) {
  const double arrivals = static_cast<double>(r.arrival_count());
  if (arrivals == 0 || r.checkpoint_count == 0)
    return std::numeric_limits<double>::quiet_NaN();
  return costs.cost(UpdateEvent::Ccrr) * (static_cast<double>(r.ccrr_count) / arrivals) +
         costs.cost(UpdateEvent::Ios) * (static_cast<double>(r.ios_count) / arrivals) +
         costs.cost(UpdateEvent::Prr) *
             (static_cast<double>(r.prr_count) / static_cast<double>(r.checkpoint_count));
}

inline std::vector<std::uint64_t> make_seeds(std::uint64_t base, int count) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) seeds.push_back(derive_seed(base, static_cast<std::uint64_t>(i)));
  return seeds;
}

inline std::vector<SimReport> run_replications(const ScenarioConfig& cfg, double horizon,
                                               std::span<const std::uint64_t> seeds) {
  std::vector<SimReport> reports;
  reports.reserve(seeds.size());
  for (std::uint64_t seed : seeds) reports.push_back(run(cfg, seed, horizon));
  return reports;
}

inline std::pair<double, double> mean_stderr(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1) / n)};
}

// ---- sweeps ----------------------------------------------------------------

namespace experiment_detail {

inline double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline double analytic_metric(Metric metric, const ScenarioConfig& cfg) {
  try {
    switch (metric) {
      case Metric::PrrPerCheckpoint: {
        const double rate = policy_checkpoint_rate(cfg.policy.kind, cfg.rates);
        return prr_expectation(PrrDistribution(rate, cfg.timer.t_p));
      }
      case Metric::TotalPower:
        return total_power(cfg.policy, cfg.rates, cfg.timer, cfg.costs).total;
      case Metric::PowerDifference:
        return power_difference(cfg.rates, cfg.timer, cfg.costs);
    }
  } catch (const std::domain_error&) {
  } catch (const std::invalid_argument&) {
  }
  return quiet_nan();  // flagged row; the sweep continues
}

inline double sim_metric(Metric metric, const SimReport& r, const CostModel& costs) {
  return metric == Metric::PrrPerCheckpoint ? sim_prr_per_checkpoint(r)
                                            : sim_total_power_per_checkpoint(r, costs);
}

inline double rel_err(double sim, double analytic) {
  if (!std::isfinite(analytic) || analytic == 0) return quiet_nan();
  return std::abs(sim - analytic) / std::abs(analytic);
}

}  // namespace experiment_detail

/// Runs the sweep and pairs every simulated point with its closed-form value.
/// Policies share replication seeds, so comparisons across policies use
/// common random numbers. The table is a pure function of (spec, metric,
/// policies, base_seed).
inline std::vector<ComparisonRow> run_sweep(const SweepSpec& spec, Metric metric,
                                            std::span<const PolicyKind> policies,
                                            std::uint64_t base_seed) {
  spec.validate();
  const auto seeds = make_seeds(base_seed, spec.replications);
  std::vector<ComparisonRow> rows;

  for (double value : spec.values) {
    const ScenarioConfig point = apply_swept_param(spec.fixed, spec.param, value);

    if (metric == Metric::PowerDifference) {
      ScenarioConfig ims = point;
      ims.policy = Policy(PolicyKind::StandardIms, point.policy.publish_interval);
      ScenarioConfig cloud = point;
      cloud.policy = Policy(PolicyKind::CloudAware, point.policy.publish_interval);
      const auto ims_runs = run_replications(ims, spec.horizon, seeds);
      const auto cloud_runs = run_replications(cloud, spec.horizon, seeds);
      std::vector<double> diffs;
      diffs.reserve(seeds.size());
      for (std::size_t i = 0; i < seeds.size(); ++i)
        diffs.push_back(sim_total_power_per_checkpoint(ims_runs[i], point.costs) -
                        sim_total_power_per_checkpoint(cloud_runs[i], point.costs));
      const auto [mean, se] = mean_stderr(diffs);
      ComparisonRow row;
      row.param = value;
      row.policy = "Difference";
      row.analytic = experiment_detail::analytic_metric(metric, point);
      row.sim_mean = mean;
      row.sim_stderr = se;
      row.rel_err = experiment_detail::rel_err(mean, row.analytic);
      rows.push_back(std::move(row));
      continue;
    }

    for (PolicyKind kind : policies) {
      ScenarioConfig cfg = point;
      cfg.policy = Policy(kind, point.policy.publish_interval);
      const auto runs = run_replications(cfg, spec.horizon, seeds);
      std::vector<double> estimates;
      estimates.reserve(runs.size());
      for (const auto& r : runs)
        estimates.push_back(experiment_detail::sim_metric(metric, r, cfg.costs));
      const auto [mean, se] = mean_stderr(estimates);
      ComparisonRow row;
      row.param = value;
      row.policy = to_string(kind);
      row.analytic = experiment_detail::analytic_metric(metric, cfg);
      row.sim_mean = mean;
      row.sim_stderr = se;
      row.rel_err = experiment_detail::rel_err(mean, row.analytic);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---- simulation-vs-analytic validation --------------------------------------

inline constexpr double kValidateMinCheckpoints = 1e5;
inline constexpr double kValidateDefaultCheckpoints = 4e5;

struct ValidationMetricRow {
  std::string metric;
  double analytic = 0;
  double sim_mean = 0;
  double sim_stderr = 0;
  double rel_err = 0;
};

struct ValidationResult {
  ValidationMetricRow prr;
  ValidationMetricRow power;
  double threshold = 0.01;
  bool pass = false;
};

/// Horizon needed for `checkpoints` expected checkpoints under this scenario.
inline double horizon_for_checkpoints(const ScenarioConfig& cfg, double checkpoints) {
  const double rate = policy_checkpoint_rate(cfg.policy.kind, cfg.rates);
  if (rate <= 0)
    throw std::invalid_argument("scenario has no checkpoint process (checkpoint rate is zero)");
  return checkpoints / rate;
}

/// Compares the simulated PRR-per-checkpoint mean and per-checkpoint power
/// average against their closed forms. Refuses horizons yielding fewer than
/// 1e5 expected checkpoints.
inline ValidationResult validate(const ScenarioConfig& cfg, std::span<const std::uint64_t> seeds,
                                 double horizon, double threshold = 0.01) {
  cfg.validate();
  detail::require(!seeds.empty(), "validate: need at least one seed");
  detail::require(std::isfinite(horizon) && horizon > 0, "validate: horizon must be > 0");
  const double rate = policy_checkpoint_rate(cfg.policy.kind, cfg.rates);
  if (rate <= 0)
    throw std::invalid_argument("validate: scenario has no checkpoint process");
  // A scheduled detach ends the checkpoint process early.
  const double window = cfg.detach.time ? std::min(horizon, *cfg.detach.time) : horizon;
  const double expected = rate * window;
  if (expected < kValidateMinCheckpoints) {
    std::ostringstream msg;
    msg << "validate: observation window " << format_double(window) << " yields ~"
        << format_double(expected) << " checkpoints; need >= "
        << format_double(kValidateMinCheckpoints) << " (horizon >= "
        << format_double(kValidateMinCheckpoints / rate) << ")";
    throw std::invalid_argument(msg.str());
  }

  const auto runs = run_replications(cfg, horizon, seeds);
  std::vector<double> prr_vals, power_vals;
  prr_vals.reserve(runs.size());
  power_vals.reserve(runs.size());
  for (const auto& r : runs) {
    prr_vals.push_back(sim_prr_per_checkpoint(r));
    power_vals.push_back(sim_total_power_per_checkpoint(r, cfg.costs));
  }

  ValidationResult out;
  out.threshold = threshold;
  const auto [prr_mean, prr_se] = mean_stderr(prr_vals);
  out.prr.metric = "prr_per_checkpoint";
  out.prr.analytic = prr_expectation(PrrDistribution(rate, cfg.timer.t_p));
  out.prr.sim_mean = prr_mean;
  out.prr.sim_stderr = prr_se;
  out.prr.rel_err = std::abs(prr_mean - out.prr.analytic) / out.prr.analytic;

  const auto [pow_mean, pow_se] = mean_stderr(power_vals);
  out.power.metric = "total_power_per_checkpoint";
  out.power.analytic = total_power(cfg.policy, cfg.rates, cfg.timer, cfg.costs).total;
  out.power.sim_mean = pow_mean;
  out.power.sim_stderr = pow_se;
  out.power.rel_err = std::abs(pow_mean - out.power.analytic) / out.power.analytic;

  out.pass = out.prr.rel_err <= threshold && out.power.rel_err <= threshold;
  return out;
}

// ---- CSV --------------------------------------------------------------------

inline void emit_csv(const std::vector<ComparisonRow>& table, std::ostream& os) {
  if (table.empty()) throw std::invalid_argument("emit_csv: table is empty");
  os << "param,policy,analytic,sim_mean,sim_stderr,rel_err\n";
  for (const auto& row : table) {
    os << format_double(row.param) << ',' << row.policy << ',' << format_double(row.analytic)
       << ',' << format_double(row.sim_mean) << ',' << format_double(row.sim_stderr) << ','
       << format_double(row.rel_err) << '\n';
  }
}

inline void emit_csv(const std::vector<ComparisonRow>& table, const std::string& path) {
  if (table.empty()) throw std::invalid_argument("emit_csv: table is empty");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
  emit_csv(table, static_cast<std::ostream&>(out));
  out.flush();
  if (!out) throw std::runtime_error("emit_csv: write to '" + path + "' failed");
}

// ---- presets ----------------------------------------------------------------

struct SweepRequest {
  std::string name;
  SweepSpec spec;
  Metric metric = Metric::TotalPower;
  std::vector<PolicyKind> policies{PolicyKind::StandardIms, PolicyKind::CloudAware};
};

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

inline std::vector<std::string> preset_names() {
  return {"fig6", "fig7", "fig8", "fig9", "fig10", "fig11"};
}

/// Canned figure sweeps. Grids default to 20 points: rates over [0.1, 2]
/// (the power-difference sweep starts at 0), timer lengths over [0.5, 5].
/// Horizons give at least 1e5 CloudAware checkpoints at every grid point.
inline SweepRequest preset_sweep(std::string_view name) {
  SweepRequest req;
  req.name = std::string(name);
  ScenarioConfig base;
  if (name == "fig6") {  // PRR count vs session rate
    base.rates = RateConfig(0.1, 0.5, 0.5);
    req.spec = SweepSpec{SweptParam::LambdaIos, linspace(0.1, 2.0, 20), base, 10, 1e5};
    req.metric = Metric::PrrPerCheckpoint;
  } else if (name == "fig7") {  // PRR count vs timer length
    base.rates = RateConfig(0.5, 0.5, 0.5);
    req.spec = SweepSpec{SweptParam::TimerTp, linspace(0.5, 5.0, 20), base, 10, 1e5};
    req.metric = Metric::PrrPerCheckpoint;
  } else if (name == "fig8") {  // total power vs capability-change rate
    base.rates = RateConfig(0.5, 0.1, 0.5);
    req.spec = SweepSpec{SweptParam::LambdaCcrr, linspace(0.1, 2.0, 20), base, 10, 1e5};
    req.metric = Metric::TotalPower;
  } else if (name == "fig9") {  // total power vs session rate
    base.rates = RateConfig(0.1, 0.5, 0.5);
    req.spec = SweepSpec{SweptParam::LambdaIos, linspace(0.1, 2.0, 20), base, 10, 1e5};
    req.metric = Metric::TotalPower;
  } else if (name == "fig10") {  // policy power difference vs access rate
    base.rates = RateConfig(0.5, 0.5, 0.0);
    req.spec = SweepSpec{SweptParam::LambdaCsa, linspace(0.0, 2.0, 20), base, 10, 1e5};
    req.metric = Metric::PowerDifference;
  } else if (name == "fig11") {  // total power vs timer length
    base.rates = RateConfig(0.3, 0.3, 0.3);
    req.spec = SweepSpec{SweptParam::TimerTp, linspace(0.5, 5.0, 20), base, 10, 1.2e5};
    req.metric = Metric::TotalPower;
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) +
                                "' (expected fig6..fig11)");
  }
  return req;
}

/// Sweep request from a JSON file:
///   {"param": "lambda_csa", "values": [...] | "range": {"min","max","count"},
///    "metric": "...", "policies": [...], "replications": N, "horizon": T,
///    "fixed": {scenario config}}
inline SweepRequest parse_sweep_request(const nlohmann::json& j) {
  try {
    config_detail::check_keys(
        j, {"param", "values", "range", "metric", "policies", "replications", "horizon", "fixed"},
        "sweep spec");
    SweepRequest req;
    req.name = "custom";
    req.spec.param = parse_swept_param(j.at("param").get<std::string>());
    if (j.contains("values")) {
      req.spec.values = j.at("values").get<std::vector<double>>();
    } else if (j.contains("range")) {
      const auto& r = j.at("range");
      config_detail::check_keys(r, {"min", "max", "count"}, "sweep range");
      req.spec.values =
          linspace(r.at("min").get<double>(), r.at("max").get<double>(), r.at("count").get<int>());
    } else {
      throw std::invalid_argument("sweep spec needs 'values' or 'range'");
    }
    if (j.contains("metric")) req.metric = parse_metric(j.at("metric").get<std::string>());
    if (j.contains("policies")) {
      req.policies.clear();
      for (const auto& p : j.at("policies"))
        req.policies.push_back(parse_policy_kind(p.get<std::string>()));
      detail::require(!req.policies.empty(), "policies must be non-empty");
    }
    if (j.contains("replications")) req.spec.replications = j.at("replications").get<int>();
    if (j.contains("horizon")) req.spec.horizon = j.at("horizon").get<double>();
    if (j.contains("fixed")) req.spec.fixed = scenario_from_json(j.at("fixed"));
    req.spec.validate();
    return req;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid sweep spec: ") + e.what());
  }
}

inline SweepRequest load_sweep_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open sweep spec file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("cannot parse sweep spec " + path + ": " + e.what());
  }
  return parse_sweep_request(j);
}

}  // namespace lusim

#endif  // LUSIM_EXPERIMENT_HPP
