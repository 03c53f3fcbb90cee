#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "channel.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "montecarlo.hpp"
#include "sensing.hpp"

namespace isac {

// Configuration problems (unreadable file, unknown key, malformed value,
// violated invariant) — mapped to exit code 2 by the command runner.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

enum class SweepAxis { pilots, snr };
enum class CapacityFormula { canonical, as_printed };

namespace detail {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_real(std::string_view v, const std::string& where) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw config_error(where + ": expected a real number, got '" + std::string(v) + "'");
  return out;
}

inline std::int64_t parse_int(std::string_view v, const std::string& where) {
  std::int64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw config_error(where + ": expected an integer, got '" + std::string(v) + "'");
  return out;
}

inline std::uint64_t parse_u64(std::string_view v, const std::string& where) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw config_error(where + ": expected a nonnegative integer, got '" + std::string(v) + "'");
  return out;
}

inline bool parse_bool(std::string_view v, const std::string& where) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw config_error(where + ": expected true/false, got '" + std::string(v) + "'");
}

}  // namespace detail

// Full run description.  SNR-valued keys are stored in dB exactly as given
// (so the echoed config reproduces them bit-for-bit) and converted to linear
// ratios only when the component structs are built.
struct ScenarioConfig {
  // slot
  int L = 14;
  int L_p = 7;
  double B = 2e8;
  // communication link
  double sigma1_sq = 2.0;
  double gamma_p_db = 10.0;
  double gamma_d_db = 10.0;
  // sensing link
  double A_s = 3.0;
  double sigma2_sq = 1.0;
  double s_rcs = 100.0;
  double d = 100.0;
  double c = 299792458.0;
  double B_rms = 0.0;  // resolved to B/sqrt(12) unless set explicitly
  bool b_rms_explicit = false;
  double gamma_ps_db = 10.0;
  double v = 0.0;
  double lambda = 0.1;
  double sigma_s_sq = 1.0;
  // metrics
  double kappa = 1.0;
  double eta = 0.5;
  double u_c_th = 0.2;
  double u_d_th = 0.2;
  // monte carlo
  std::int64_t n_samples = 1000000;
  std::uint64_t master_seed = 123456789;
  std::uint64_t stream_id = 0;
  int mc_workers = 0;  // 0 = one per hardware thread
  // sweep control
  SweepAxis axis = SweepAxis::pilots;
  double axis_start = std::numeric_limits<double>::quiet_NaN();  // NaN = per-axis default
  double axis_stop = std::numeric_limits<double>::quiet_NaN();
  double axis_step = std::numeric_limits<double>::quiet_NaN();
  // presentation and modes
  std::string output;  // empty = "<subcommand>.csv"
  PathLossMode path_loss_mode = PathLossMode::range_derated;
  CapacityFormula capacity_form = CapacityFormula::canonical;
  bool normalize_capacity = false;
  std::string lp_select = "optimal";  // "optimal" or a fixed integer
  double gamma_p_offset_db = 0.0;
  double gamma_d_offset_db = 0.0;
  double gamma_ps_offset_db = 0.0;

  SlotConfig slot() const { return {L, L_p, B}; }

  CommLink comm() const {
    return {sigma1_sq, detail::db_to_linear(gamma_p_db), detail::db_to_linear(gamma_d_db)};
  }

  // Link variants for the scenario-SNR axis: one scalar gamma (dB) drives
  // all three SNRs through the configured per-link offsets.
  CommLink comm_at(double gamma_db) const {
    return {sigma1_sq, detail::db_to_linear(gamma_db + gamma_p_offset_db),
            detail::db_to_linear(gamma_db + gamma_d_offset_db)};
  }

  SenseLink sense() const {
    return {A_s,          sigma2_sq, s_rcs, d, c, resolved_b_rms(),
            detail::db_to_linear(gamma_ps_db), v, lambda, sigma_s_sq};
  }

  SenseLink sense_at(double gamma_db) const {
    SenseLink s = sense();
    s.gamma_ps = detail::db_to_linear(gamma_db + gamma_ps_offset_db);
    return s;
  }

  MetricConfig metric() const { return {kappa, eta, u_c_th, u_d_th}; }

  McSpec mc() const { return {n_samples, master_seed, stream_id}; }

  double resolved_b_rms() const { return b_rms_explicit ? B_rms : B / std::sqrt(12.0); }

  void validate() const {
    slot().validate();
    comm().validate();
    sense().validate();
    metric().validate();
    mc().validate();
    if (mc_workers < 0) throw config_error("mc_workers must be >= 0");
    if (!std::isnan(axis_step) && !(axis_step > 0.0))
      throw config_error("axis_step must be > 0");
    if (!std::isnan(axis_start) && !std::isnan(axis_stop) && axis_start > axis_stop)
      throw config_error("axis range is empty (axis_start > axis_stop)");
    if (lp_select != "optimal") {
      const std::int64_t fixed = detail::parse_int(lp_select, "lp_select");
      if (fixed < 1 || fixed > L - 1)
        throw config_error("lp_select must be 'optimal' or an integer in [1, L-1]");
    }
  }
};

namespace detail {

inline void apply_key(ScenarioConfig& cfg, std::string_view key, std::string_view value,
                      const std::string& where) {
  auto real = [&] { return parse_real(value, where); };
  auto integer = [&] { return parse_int(value, where); };
  auto boolean = [&] { return parse_bool(value, where); };

  if (key == "L") cfg.L = static_cast<int>(integer());
  else if (key == "L_p") cfg.L_p = static_cast<int>(integer());
  else if (key == "B") cfg.B = real();
  else if (key == "sigma1_sq") cfg.sigma1_sq = real();
  else if (key == "gamma_p_db") cfg.gamma_p_db = real();
  else if (key == "gamma_d_db") cfg.gamma_d_db = real();
  else if (key == "A_s") cfg.A_s = real();
  else if (key == "sigma2_sq") cfg.sigma2_sq = real();
  else if (key == "s_rcs") cfg.s_rcs = real();
  else if (key == "d") cfg.d = real();
  else if (key == "c") cfg.c = real();
  else if (key == "B_rms") {
    cfg.B_rms = real();
    cfg.b_rms_explicit = true;
  } else if (key == "gamma_ps_db") cfg.gamma_ps_db = real();
  else if (key == "v") cfg.v = real();
  else if (key == "lambda") cfg.lambda = real();
  else if (key == "sigma_s_sq") cfg.sigma_s_sq = real();
  else if (key == "kappa") cfg.kappa = real();
  else if (key == "eta") cfg.eta = real();
  else if (key == "u_c_th") cfg.u_c_th = real();
  else if (key == "u_d_th") cfg.u_d_th = real();
  else if (key == "n_samples") cfg.n_samples = integer();
  else if (key == "master_seed") cfg.master_seed = parse_u64(value, where);
  else if (key == "stream_id") cfg.stream_id = parse_u64(value, where);
  else if (key == "mc_workers") cfg.mc_workers = static_cast<int>(integer());
  else if (key == "axis") {
    if (value == "pilots") cfg.axis = SweepAxis::pilots;
    else if (value == "snr") cfg.axis = SweepAxis::snr;
    else throw config_error(where + ": axis must be 'pilots' or 'snr'");
  } else if (key == "axis_start") cfg.axis_start = real();
  else if (key == "axis_stop") cfg.axis_stop = real();
  else if (key == "axis_step") cfg.axis_step = real();
  else if (key == "output") cfg.output = std::string(value);
  else if (key == "path_loss_mode") {
    if (value == "eq3") cfg.path_loss_mode = PathLossMode::range_derated;
    else if (value == "strict_eq14") cfg.path_loss_mode = PathLossMode::transmit_only;
    else throw config_error(where + ": path_loss_mode must be 'eq3' or 'strict_eq14'");
  } else if (key == "capacity_form") {
    if (value == "eq12_canonical") cfg.capacity_form = CapacityFormula::canonical;
    else if (value == "eq7_as_printed") cfg.capacity_form = CapacityFormula::as_printed;
    else throw config_error(where + ": capacity_form must be 'eq12_canonical' or 'eq7_as_printed'");
  } else if (key == "normalize_capacity") cfg.normalize_capacity = boolean();
  else if (key == "lp_select") cfg.lp_select = std::string(value);
  else if (key == "gamma_p_offset_db") cfg.gamma_p_offset_db = real();
  else if (key == "gamma_d_offset_db") cfg.gamma_d_offset_db = real();
  else if (key == "gamma_ps_offset_db") cfg.gamma_ps_offset_db = real();
  else throw config_error(where + ": unknown key '" + std::string(key) + "'");
}

}  // namespace detail

// Flat `key = value` file; '#' starts a comment; blank lines ignored.
inline void apply_config_file(ScenarioConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s(line);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    const std::string where = path + ":" + std::to_string(lineno);
    if (eq == std::string_view::npos)
      throw config_error(where + ": expected 'key = value'");
    const auto key = detail::trim(s.substr(0, eq));
    const auto value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw config_error(where + ": empty key");
    detail::apply_key(cfg, key, value, where);
  }
}

// One `--key=value` command-line override.
inline void apply_override(ScenarioConfig& cfg, std::string_view arg) {
  if (arg.size() < 3 || arg.substr(0, 2) != "--")
    throw config_error("malformed override '" + std::string(arg) + "' (expected --key=value)");
  const auto body = arg.substr(2);
  const auto eq = body.find('=');
  if (eq == std::string_view::npos)
    throw config_error("malformed override '" + std::string(arg) + "' (expected --key=value)");
  detail::apply_key(cfg, detail::trim(body.substr(0, eq)), detail::trim(body.substr(eq + 1)),
                    std::string(arg.substr(0, eq + 2)));
}

// Fully resolved `key = value` dump written next to every output file.  The
// goal is that feeding this text back through apply_config_file reproduces
// the run bit-for-bit, so values are emitted from the stored fields (dB kept
// in dB) with round-trip formatting.
inline std::string echo_config(const ScenarioConfig& cfg) {
  std::string out;
  auto kv = [&out](std::string_view key, const std::string& value) {
    out.append(key);
    out.append(" = ");
    out.append(value);
    out.push_back('\n');
  };
  kv("L", format_number(cfg.L));
  kv("L_p", format_number(cfg.L_p));
  kv("B", format_number(cfg.B));
  kv("sigma1_sq", format_number(cfg.sigma1_sq));
  kv("gamma_p_db", format_number(cfg.gamma_p_db));
  kv("gamma_d_db", format_number(cfg.gamma_d_db));
  kv("A_s", format_number(cfg.A_s));
  kv("sigma2_sq", format_number(cfg.sigma2_sq));
  kv("s_rcs", format_number(cfg.s_rcs));
  kv("d", format_number(cfg.d));
  kv("c", format_number(cfg.c));
  kv("B_rms", format_number(cfg.resolved_b_rms()));
  kv("gamma_ps_db", format_number(cfg.gamma_ps_db));
  kv("v", format_number(cfg.v));
  kv("lambda", format_number(cfg.lambda));
  kv("sigma_s_sq", format_number(cfg.sigma_s_sq));
  kv("kappa", format_number(cfg.kappa));
  kv("eta", format_number(cfg.eta));
  kv("u_c_th", format_number(cfg.u_c_th));
  kv("u_d_th", format_number(cfg.u_d_th));
  kv("n_samples", format_number(cfg.n_samples));
  kv("master_seed", std::to_string(cfg.master_seed));
  kv("stream_id", std::to_string(cfg.stream_id));
  kv("mc_workers", format_number(cfg.mc_workers));
  kv("axis", cfg.axis == SweepAxis::pilots ? "pilots" : "snr");
  kv("axis_start", format_number(cfg.axis_start));
  kv("axis_stop", format_number(cfg.axis_stop));
  kv("axis_step", format_number(cfg.axis_step));
  kv("output", cfg.output);
  kv("path_loss_mode",
     cfg.path_loss_mode == PathLossMode::range_derated ? "eq3" : "strict_eq14");
  kv("capacity_form",
     cfg.capacity_form == CapacityFormula::canonical ? "eq12_canonical" : "eq7_as_printed");
  kv("normalize_capacity", cfg.normalize_capacity ? "true" : "false");
  kv("lp_select", cfg.lp_select);
  kv("gamma_p_offset_db", format_number(cfg.gamma_p_offset_db));
  kv("gamma_d_offset_db", format_number(cfg.gamma_d_offset_db));
  kv("gamma_ps_offset_db", format_number(cfg.gamma_ps_offset_db));
  return out;
}

}  // namespace isac
