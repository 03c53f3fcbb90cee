#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "capacity.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "montecarlo.hpp"
#include "scenario.hpp"

namespace isac {
namespace detail {

inline int resolved_workers(const ScenarioConfig& cfg) {
  if (cfg.mc_workers > 0) return cfg.mc_workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Closed-form capacity under the configured formula choice and
// normalisation (per-slot spectral form C / (B L) when requested).
inline double capacity_value(const ScenarioConfig& cfg, const SlotConfig& slot,
                             const CommLink& comm) {
  const double c = cfg.capacity_form == CapacityFormula::canonical
                       ? ergodic_capacity(slot, comm).capacity
                       : ergodic_capacity_as_printed(slot, comm);
  return cfg.normalize_capacity ? c / (slot.B * slot.L) : c;
}

inline double capacity_norm(const ScenarioConfig& cfg, const SlotConfig& slot) {
  return cfg.normalize_capacity ? 1.0 / (slot.B * slot.L) : 1.0;
}

// Inclusive arithmetic grid; the stop value is included up to half-step
// rounding slack so "-5..25 step 1" yields all 31 points.
inline std::vector<double> axis_grid(double start, double stop, double step) {
  std::vector<double> points;
  for (int i = 0;; ++i) {
    const double x = start + i * step;
    if (x > stop + 0.5 * step) break;
    points.push_back(x);
  }
  return points;
}

struct ResolvedRun {
  ScenarioConfig cfg;      // with axis bounds and output path filled in
  std::string output_path; // final filesystem path
};

inline ResolvedRun resolve_run(ScenarioConfig cfg, const std::string& command) {
  // Per-axis sweep defaults: the integer pilot grid, or -5..25 dB.
  if (cfg.axis == SweepAxis::pilots) {
    if (std::isnan(cfg.axis_start)) cfg.axis_start = 1.0;
    if (std::isnan(cfg.axis_stop)) cfg.axis_stop = cfg.L - 1.0;
  } else {
    if (std::isnan(cfg.axis_start)) cfg.axis_start = -5.0;
    if (std::isnan(cfg.axis_stop)) cfg.axis_stop = 25.0;
  }
  if (std::isnan(cfg.axis_step)) cfg.axis_step = 1.0;
  if (cfg.output.empty()) cfg.output = command + ".csv";

  std::filesystem::path out(cfg.output);
  if (out.is_relative()) {
    if (const char* dir = std::getenv("ISAC_OUTPUT_DIR"); dir && *dir)
      out = std::filesystem::path(dir) / out;
  }
  cfg.validate();
  if (cfg.axis_start > cfg.axis_stop) throw config_error("axis range is empty");
  return {std::move(cfg), out.string()};
}

inline std::string run_sweep_capacity(const ScenarioConfig& cfg) {
  const CommLink comm = cfg.comm();
  const int workers = resolved_workers(cfg);
  std::string csv = "L_p,capacity_closed,capacity_mc_mean,capacity_mc_stderr\n";
  SlotConfig slot = cfg.slot();
  for (int lp = 1; lp <= cfg.L - 1; ++lp) {
    slot.L_p = lp;
    const double closed = capacity_value(cfg, slot, comm);
    // One decorrelated stream per row, keyed by the pilot count.
    McSpec mc = cfg.mc();
    mc.stream_id += static_cast<std::uint64_t>(lp);
    const McEstimate est = mc_ergodic_capacity(slot, comm, mc, workers);
    const double norm = capacity_norm(cfg, slot);
    csv += format_number(lp) + "," + format_number(closed) + "," +
           format_number(est.mean * norm) + "," + format_number(est.std_error * norm) + "\n";
  }
  return csv;
}

inline std::string run_sweep_crb(const ScenarioConfig& cfg) {
  const SenseLink sense = cfg.sense();
  std::string csv = "L_p,crb_closed,crb_series\n";
  for (int lp = 1; lp <= cfg.L - 1; ++lp) {
    const double closed = ergodic_crb(sense, lp, cfg.path_loss_mode);
    const double series = ergodic_crb_series(sense, lp, 400, cfg.path_loss_mode);
    csv += format_number(lp) + "," + format_number(closed) + "," + format_number(series) + "\n";
  }
  return csv;
}

inline std::string run_tradeoff(const ScenarioConfig& cfg) {
  const CommLink comm = cfg.comm();
  const SenseLink sense = cfg.sense();
  std::string csv = "L_p,capacity,ergodic_crb\n";
  SlotConfig slot = cfg.slot();
  for (int lp = 1; lp <= cfg.L - 1; ++lp) {
    slot.L_p = lp;
    csv += format_number(lp) + "," + format_number(capacity_value(cfg, slot, comm)) + "," +
           format_number(ergodic_crb(sense, lp, cfg.path_loss_mode)) + "\n";
  }
  return csv;
}

inline std::string run_sweep_efficiency(const ScenarioConfig& cfg) {
  std::string csv = "axis_value,efficiency,L_p_used\n";
  const MetricConfig metric = cfg.metric();

  if (cfg.axis == SweepAxis::pilots) {
    const CommLink comm = cfg.comm();
    const SenseLink sense = cfg.sense();
    SlotConfig slot = cfg.slot();
    for (double x : axis_grid(cfg.axis_start, cfg.axis_stop, cfg.axis_step)) {
      const int lp = static_cast<int>(std::lround(x));
      slot.L_p = lp;
      const double e = efficiency(ergodic_capacity(slot, comm).capacity,
                                  ergodic_crb(sense, lp, cfg.path_loss_mode), metric);
      csv += format_number(x) + "," + format_number(e) + "," + format_number(lp) + "\n";
    }
    return csv;
  }

  // SNR axis: one scalar gamma in dB drives all link SNRs (with the
  // configured offsets); the pilot count is either re-optimised per point
  // or held fixed by lp_select.
  const bool optimal = cfg.lp_select == "optimal";
  const int fixed_lp = optimal ? 0 : static_cast<int>(std::stoll(cfg.lp_select));
  SlotConfig slot = cfg.slot();
  for (double g_db : axis_grid(cfg.axis_start, cfg.axis_stop, cfg.axis_step)) {
    const CommLink comm = cfg.comm_at(g_db);
    const SenseLink sense = cfg.sense_at(g_db);
    const int lp = optimal
                       ? optimize_pilot_length(slot, comm, sense, metric, cfg.path_loss_mode).l_p_opt
                       : fixed_lp;
    slot.L_p = lp;
    const double e = efficiency(ergodic_capacity(slot, comm).capacity,
                                ergodic_crb(sense, lp, cfg.path_loss_mode), metric);
    csv += format_number(g_db) + "," + format_number(e) + "," + format_number(lp) + "\n";
  }
  return csv;
}

inline std::string run_sweep_utility(const ScenarioConfig& cfg) {
  std::string csv = "L_p,utility,capacity_ratio,crb_ratio,feasible\n";
  for (const auto& row :
       pilot_profile(cfg.slot(), cfg.comm(), cfg.sense(), cfg.metric(), cfg.path_loss_mode)) {
    csv += format_number(row.L_p) + "," + format_number(row.utility) + "," +
           format_number(row.capacity_ratio) + "," + format_number(row.crb_ratio) + "," +
           (row.feasible ? "1" : "0") + "\n";
  }
  return csv;
}

inline std::string run_optimize(const ScenarioConfig& cfg) {
  const OptimizerReport rep =
      optimize_pilot_length(cfg.slot(), cfg.comm(), cfg.sense(), cfg.metric(), cfg.path_loss_mode);
  std::string csv = "L_p_opt,q_star,iterations,converged\n";
  csv += format_number(rep.l_p_opt) + "," + format_number(rep.q_star) + "," +
         format_number(rep.iterations) + "," + (rep.converged ? "1" : "0") + "\n";
  return csv;
}

// Closed form vs Monte Carlo on the acceptance grids: the capacity over
// (gamma_p, gamma_d) in {0,10,20} dB x L_p in {1..L-1} at n_samples draws
// (pass within max(0.5% relative, 3 standard errors)), and the range bound
// over rice ratio {0, 0.5, 1.5, 5} x L_p {1, mid, L-1} at 10x draws (pass
// within 3 standard errors).
inline std::string run_mc_validate(const ScenarioConfig& cfg) {
  const int workers = resolved_workers(cfg);
  std::string csv = "quantity,gamma_p_db,gamma_d_db,rice_ratio,L_p,closed,mc_mean,mc_stderr,pass\n";
  std::uint64_t row = 0;

  SlotConfig slot = cfg.slot();
  for (double gp_db : {0.0, 10.0, 20.0}) {
    for (double gd_db : {0.0, 10.0, 20.0}) {
      CommLink comm = cfg.comm();
      comm.gamma_p = detail::db_to_linear(gp_db);
      comm.gamma_d = detail::db_to_linear(gd_db);
      for (int lp = 1; lp <= cfg.L - 1; ++lp) {
        slot.L_p = lp;
        const double closed = ergodic_capacity(slot, comm).capacity;
        McSpec mc = cfg.mc();
        mc.stream_id += row++;
        const McEstimate est = mc_ergodic_capacity(slot, comm, mc, workers);
        const bool pass = std::abs(est.mean - closed) <=
                          std::max(5e-3 * std::abs(closed), 3.0 * est.std_error);
        csv += "capacity," + format_number(gp_db) + "," + format_number(gd_db) + ",," +
               format_number(lp) + "," + format_number(closed) + "," + format_number(est.mean) +
               "," + format_number(est.std_error) + "," + (pass ? "1" : "0") + "\n";
      }
    }
  }

  const int mid_lp = cfg.L / 2;
  for (double u : {0.0, 0.5, 1.5, 5.0}) {
    SenseLink sense = cfg.sense();
    sense.A_s = 2.0 * sense.sigma2_sq * u;
    for (int lp : {1, mid_lp, cfg.L - 1}) {
      const double closed = ergodic_crb(sense, lp, cfg.path_loss_mode);
      McSpec mc = cfg.mc();
      mc.n_samples *= 10;
      mc.stream_id += row++;
      const McEstimate est = mc_ergodic_crb(sense, lp, mc, workers, cfg.path_loss_mode);
      const bool pass = std::abs(est.mean - closed) <= 3.0 * est.std_error;
      csv += "crb,,," + format_number(u) + "," + format_number(lp) + "," +
             format_number(closed) + "," + format_number(est.mean) + "," +
             format_number(est.std_error) + "," + (pass ? "1" : "0") + "\n";
    }
  }
  return csv;
}

}  // namespace detail

inline const char* cli_usage() {
  return
      "usage: isac <subcommand> [--config=FILE] [--key=value ...]\n"
      "\n"
      "subcommands:\n"
      "  sweep-capacity    closed-form and Monte Carlo capacity over the pilot grid\n"
      "  sweep-crb         closed-form and series-form range bound over the pilot grid\n"
      "  tradeoff          capacity vs range bound, one row per pilot count\n"
      "  sweep-efficiency  efficiency over the pilot grid (axis=pilots) or an SNR\n"
      "                    sweep with per-point optimal or fixed pilot count (axis=snr)\n"
      "  sweep-utility     weighted utility, ratios, and feasibility per pilot count\n"
      "  optimize          pilot count maximising efficiency (fractional programming)\n"
      "  mc-validate       closed forms vs Monte Carlo oracles on the acceptance grids\n"
      "\n"
      "Options are configuration keys (see README); --key=value overrides the config\n"
      "file.  Output goes to --output=PATH (default <subcommand>.csv, under\n"
      "ISAC_OUTPUT_DIR when that is set and the path is relative).  Exit codes:\n"
      "0 success, 2 configuration error, 3 numerical non-convergence.\n";
}

// Parses arguments, runs one subcommand, writes the CSV and its config
// sidecar.  Returns the process exit code.
inline int run_cli(const std::vector<std::string>& args) {
  if (args.empty() || args[0] == "--help" || args[0] == "help" || args[0] == "-h") {
    std::fputs(cli_usage(), stdout);
    return args.empty() ? 2 : 0;
  }
  const std::string command = args[0];

  try {
    ScenarioConfig cfg;
    // Config file first (wherever the flag appears), then the remaining
    // overrides in command-line order.
    std::string config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i].rfind("--config=", 0) == 0) {
        if (!config_path.empty()) throw config_error("--config given twice");
        config_path = args[i].substr(9);
        if (config_path.empty()) throw config_error("--config needs a file path");
      }
    }
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i].rfind("--config=", 0) == 0) continue;
      apply_override(cfg, args[i]);
    }

    std::string csv;
    detail::ResolvedRun run = detail::resolve_run(std::move(cfg), command);
    if (command == "sweep-capacity") csv = detail::run_sweep_capacity(run.cfg);
    else if (command == "sweep-crb") csv = detail::run_sweep_crb(run.cfg);
    else if (command == "tradeoff") csv = detail::run_tradeoff(run.cfg);
    else if (command == "sweep-efficiency") csv = detail::run_sweep_efficiency(run.cfg);
    else if (command == "sweep-utility") csv = detail::run_sweep_utility(run.cfg);
    else if (command == "optimize") csv = detail::run_optimize(run.cfg);
    else if (command == "mc-validate") csv = detail::run_mc_validate(run.cfg);
    else {
      std::fprintf(stderr, "unknown subcommand '%s'\n\n%s", command.c_str(), cli_usage());
      return 2;
    }

    write_file_atomic(run.output_path, csv);
    write_file_atomic(run.output_path + ".config", echo_config(run.cfg));
    std::fprintf(stdout, "wrote %s\n", run.output_path.c_str());
    return 0;
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const convergence_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace isac
