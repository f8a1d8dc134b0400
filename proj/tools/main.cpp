// lusim — command-line harness for the location-update cost model: point
// evaluation of the closed forms, single simulation runs, figure-preset
// parameter sweeps, and simulation-vs-analytic validation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lusim/analytic.hpp"
#include "lusim/experiment.hpp"
#include "lusim/scenario.hpp"
#include "lusim/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitUsageError = 2;

lusim::ScenarioConfig load_config(const std::string& path) {
  if (path.empty()) return lusim::ScenarioConfig{};
  return lusim::load_scenario_file(path);
}

void write_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  out << text;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string render_analytic(const lusim::ScenarioConfig& cfg) {
  using namespace lusim;
  std::ostringstream os;
  os << "lambda_ios = " << format_double(cfg.rates.lambda_ios) << "\n"
     << "lambda_ccrr = " << format_double(cfg.rates.lambda_ccrr) << "\n"
     << "lambda_csa = " << format_double(cfg.rates.lambda_csa) << "\n"
     << "lambda_total = " << format_double(total_event_rate(cfg.rates)) << "\n"
     << "t_p = " << format_double(cfg.timer.t_p) << "\n";
  for (PolicyKind kind : {PolicyKind::StandardIms, PolicyKind::CloudAware}) {
    const std::string label = to_string(kind);
    try {
      const double rate = policy_checkpoint_rate(kind, cfg.rates);
      const double expect = prr_expectation(PrrDistribution(rate, cfg.timer.t_p));
      os << "prr_expectation[" << label << "] = " << format_double(expect) << "\n";
    } catch (const std::exception& e) {
      os << "prr_expectation[" << label << "] = undefined (" << e.what() << ")\n";
    }
    try {
      const auto b = total_power(Policy(kind, cfg.policy.publish_interval), cfg.rates, cfg.timer,
                                 cfg.costs);
      os << "power_ccrr[" << label << "] = " << format_double(b.power_ccrr) << "\n"
         << "power_ios[" << label << "] = " << format_double(b.power_ios) << "\n"
         << "power_prr[" << label << "] = " << format_double(b.power_prr) << "\n"
         << "total_power[" << label << "] = " << format_double(b.total) << "\n";
    } catch (const std::exception& e) {
      os << "total_power[" << label << "] = undefined (" << e.what() << ")\n";
    }
  }
  try {
    os << "power_difference = " << format_double(power_difference(cfg.rates, cfg.timer, cfg.costs))
       << "\n";
  } catch (const std::exception& e) {
    os << "power_difference = undefined (" << e.what() << ")\n";
  }
  return os.str();
}

std::string render_report(const lusim::SimReport& r) {
  using lusim::format_double;
  std::ostringstream os;
  os << "ios_count = " << r.ios_count << "\n"
     << "ccrr_count = " << r.ccrr_count << "\n"
     << "csa_count = " << r.csa_count << "\n"
     << "prr_count = " << r.prr_count << "\n"
     << "incoming_count = " << r.incoming_count << "\n"
     << "publish_count = " << r.publish_count << "\n"
     << "checkpoint_count = " << r.checkpoint_count << "\n"
     << "executed_events = " << r.executed_events << "\n"
     << "total_power = " << format_double(r.total_power) << "\n";
  if (r.checkpoint_count > 0)
    os << "prr_per_checkpoint = " << format_double(lusim::sim_prr_per_checkpoint(r)) << "\n";
  if (r.detach_time) os << "detach_time = " << format_double(*r.detach_time) << "\n";
  if (r.registrar_expiry_at_detach)
    os << "registrar_expiry_at_detach = " << format_double(*r.registrar_expiry_at_detach) << "\n";
  if (r.detach_detected_at)
    os << "detach_detected_at = " << format_double(*r.detach_detected_at) << "\n";
  os << "trace_digest = " << hex64(r.trace_digest) << "\n";
  return os.str();
}

std::string render_validation(const lusim::ValidationResult& v) {
  using lusim::format_double;
  std::ostringstream os;
  for (const auto* row : {&v.prr, &v.power}) {
    os << row->metric << ": analytic=" << format_double(row->analytic)
       << " sim_mean=" << format_double(row->sim_mean)
       << " sim_stderr=" << format_double(row->sim_stderr)
       << " rel_err=" << format_double(row->rel_err) << "\n";
  }
  os << "threshold = " << format_double(v.threshold) << "\n"
     << "result = " << (v.pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::istringstream in(csv);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    seeds.push_back(std::stoull(token));
  }
  if (seeds.empty()) throw std::invalid_argument("--seeds: no seeds given");
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Location-update power cost: analytic model and discrete-event simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 1;
  double horizon = 0;  // 0 = subcommand default
  app.add_option("--config", config_path, "Scenario config file (JSON)");
  app.add_option("--out", out_path, "Write output to this file instead of stdout");
  app.add_option("--seed", seed, "Base RNG seed");
  app.add_option("--horizon", horizon, "Virtual-time horizon");

  auto* cmd_analytic = app.add_subcommand("analytic", "Evaluate the closed forms at one point");

  auto* cmd_simulate = app.add_subcommand("simulate", "Run one seeded simulation");
  std::string trace_path;
  cmd_simulate->add_option("--trace", trace_path, "Write the executed-event trace CSV here");

  auto* cmd_sweep = app.add_subcommand("sweep", "Run a parameter sweep and emit CSV");
  std::string preset_name;
  std::string sweep_spec_path;
  int sweep_replications = 0;
  cmd_sweep->add_option("--preset", preset_name, "Preset name (fig6..fig11)");
  cmd_sweep->add_option("--spec", sweep_spec_path, "Sweep spec file (JSON)");
  cmd_sweep->add_option("--replications", sweep_replications, "Override replication count");

  auto* cmd_validate =
      app.add_subcommand("validate", "Compare simulated means against the closed forms");
  double threshold = 0.01;
  int validate_replications = 3;
  std::string seeds_csv;
  cmd_validate->add_option("--threshold", threshold, "Relative-error pass threshold");
  cmd_validate->add_option("--replications", validate_replications,
                           "Replication count when --seeds is not given");
  cmd_validate->add_option("--seeds", seeds_csv, "Comma-separated explicit seed list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsageError;
  }

  try {
    const lusim::ScenarioConfig cfg = load_config(config_path);

    if (cmd_analytic->parsed()) {
      write_text(render_analytic(cfg), out_path);
      return kExitOk;
    }

    if (cmd_simulate->parsed()) {
      const double h = horizon > 0 ? horizon : 1e4;
      lusim::SimReport report;
      if (!trace_path.empty()) {
        std::ofstream trace_out(trace_path);
        if (!trace_out) throw std::runtime_error("cannot open '" + trace_path + "' for writing");
        report = lusim::run(cfg, seed, h, lusim::csv_trace_sink(trace_out));
      } else {
        report = lusim::run(cfg, seed, h);
      }
      write_text(render_report(report), out_path);
      return kExitOk;
    }

    if (cmd_sweep->parsed()) {
      if (preset_name.empty() == sweep_spec_path.empty())
        throw std::invalid_argument("sweep: give exactly one of --preset or --spec");
      lusim::SweepRequest req = preset_name.empty() ? lusim::load_sweep_file(sweep_spec_path)
                                                    : lusim::preset_sweep(preset_name);
      if (!config_path.empty()) req.spec.fixed = cfg;
      if (horizon > 0) req.spec.horizon = horizon;
      if (sweep_replications > 0) req.spec.replications = sweep_replications;
      const auto table = lusim::run_sweep(req.spec, req.metric, req.policies, seed);
      if (out_path.empty()) {
        lusim::emit_csv(table, std::cout);
      } else {
        lusim::emit_csv(table, out_path);
      }
      return kExitOk;
    }

    if (cmd_validate->parsed()) {
      std::vector<std::uint64_t> seeds = seeds_csv.empty()
                                             ? lusim::make_seeds(seed, validate_replications)
                                             : parse_seed_list(seeds_csv);
      const double h = horizon > 0
                           ? horizon
                           : lusim::horizon_for_checkpoints(cfg, lusim::kValidateDefaultCheckpoints);
      const auto result = lusim::validate(cfg, seeds, h, threshold);
      write_text(render_validation(result), out_path);
      return result.pass ? kExitOk : kExitValidationFailure;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsageError;
  }
  return kExitUsageError;
}
