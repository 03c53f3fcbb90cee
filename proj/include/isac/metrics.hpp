#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "capacity.hpp"
#include "channel.hpp"
#include "sensing.hpp"

namespace isac {

struct MetricConfig {
  double kappa = 1.0;   // efficiency regulariser
  double eta = 0.5;     // capacity weight in the utility
  double u_c_th = 0.2;  // capacity-utility threshold
  double u_d_th = 0.2;  // sensing-utility threshold

  void validate() const {
    if (!(kappa >= 0.0)) throw std::invalid_argument("MetricConfig: kappa must be >= 0");
    if (!(eta > 0.0 && eta < 1.0))
      throw std::invalid_argument("MetricConfig: eta must lie in (0, 1)");
    if (!(u_c_th >= 0.0 && u_c_th <= 1.0))
      throw std::invalid_argument("MetricConfig: u_c_th must lie in [0, 1]");
    if (!(u_d_th >= 0.0 && u_d_th <= 1.0))
      throw std::invalid_argument("MetricConfig: u_d_th must lie in [0, 1]");
  }
};

struct OptimizerReport {
  int l_p_opt = 1;
  double q_star = 0.0;  // value of the continuous maximiser
  int iterations = 0;
  bool converged = false;
  // One (pilot length, efficiency) pair per outer iteration; the efficiency
  // column is exactly the fractional-programming q-sequence.
  std::vector<std::pair<double, double>> candidates_examined;
};

// Capacity gained per unit of (regularised) sensing error.
inline double efficiency(double C, double crb, const MetricConfig& cfg) {
  cfg.validate();
  if (!(C >= 0.0)) throw std::domain_error("efficiency: capacity must be >= 0");
  if (!(crb >= 0.0)) throw std::domain_error("efficiency: crb must be >= 0");
  if (!(cfg.kappa + crb > 0.0))
    throw std::domain_error("efficiency: kappa + crb must be > 0");
  return C / (cfg.kappa + crb);
}

namespace detail {

// Golden-section maximisation of a unimodal function on [lo, hi].
// Derivative-free on purpose: the inner objective is concave but its
// derivative has no closed form worth maintaining.
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi) {
  constexpr double invphi = 0.6180339887498949;
  if (!(hi > lo)) return {lo, f(lo)};
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  const double span = hi - lo;
  for (int i = 0; i < 200 && (b - a) > 1e-10 * span; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace detail

// Pilot length maximising efficiency, by fractional programming: the ratio
// maximisation is reduced to a sequence of parametric concave problems
//   Q2(x; q) = C(x) - q * (kappa + scale/x)
// over real x in [1, L-1]; q is updated to the efficiency at the inner
// maximiser until the residual max Q2 vanishes.  The continuous optimum is
// then rounded to the best integer in a +-1 window (the objective is
// unimodal, so the integer argmax is adjacent to the relaxed one); ties go
// to the cheaper pilot count.
inline OptimizerReport optimize_pilot_length(const SlotConfig& slot, const CommLink& comm,
                                             const SenseLink& sense, const MetricConfig& cfg,
                                             PathLossMode mode = PathLossMode::range_derated) {
  slot.validate();
  comm.validate();
  sense.validate();
  cfg.validate();

  const double lo = 1.0;
  const double hi = slot.L - 1.0;
  const double scale = detail::ergodic_crb_scale(sense, mode);
  auto cap = [&](double x) { return ergodic_capacity_relaxed(slot, comm, x); };
  auto eff = [&](double x) { return cap(x) / (cfg.kappa + scale / x); };

  OptimizerReport rep;
  double q = eff(0.5 * (lo + hi));
  double x_star = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    auto q2 = [&](double x) { return cap(x) - q * (cfg.kappa + scale / x); };
    const auto [x_max, residual] = detail::golden_max(q2, lo, hi);
    x_star = x_max;
    rep.candidates_examined.emplace_back(x_max, eff(x_max));
    if (std::abs(residual) <= 1e-9 * std::max(1.0, q)) {
      rep.converged = true;
      break;
    }
    q = rep.candidates_examined.back().second;
  }
  rep.iterations = static_cast<int>(rep.candidates_examined.size());
  rep.q_star = rep.candidates_examined.back().second;

  const double fl = std::floor(x_star);
  const double ce = std::ceil(x_star);
  double best_e = -1.0;
  SlotConfig probe = slot;
  for (double cand : {fl - 1.0, fl, ce, ce + 1.0}) {
    if (cand < lo || cand > hi) continue;
    const int lp = static_cast<int>(cand);
    if (best_e >= 0.0 && lp == rep.l_p_opt) continue;  // duplicate (e.g. fl == ce)
    probe.L_p = lp;
    const double e = efficiency(ergodic_capacity(probe, comm).capacity,
                                ergodic_crb(sense, lp, mode), cfg);
    // Candidates ascend, so a strict-improvement test resolves near-ties
    // (relative 1e-12) in favour of the smaller pilot count.
    if (e > best_e + 1e-12 * std::abs(best_e)) {
      best_e = e;
      rep.l_p_opt = lp;
    }
  }
  return rep;
}

// Per-pilot-count metric table for one scenario: closed-form capacity and
// range bound, their normalised ratios, threshold feasibility, and the
// weighted utility.  The normalisers are scenario-wide: best capacity over
// the integer grid, and the bound at L-1 (the bound decreases in L_p, so
// that is its minimum).
struct PilotPoint {
  int L_p = 1;
  double capacity = 0.0;
  double crb = 0.0;
  double capacity_ratio = 0.0;
  double crb_ratio = 0.0;
  bool feasible = false;
  double utility = 0.0;
};

inline std::vector<PilotPoint> pilot_profile(const SlotConfig& slot, const CommLink& comm,
                                             const SenseLink& sense, const MetricConfig& cfg,
                                             PathLossMode mode = PathLossMode::range_derated) {
  slot.validate();
  comm.validate();
  sense.validate();
  cfg.validate();

  std::vector<PilotPoint> rows(slot.L - 1);
  SlotConfig probe = slot;
  double c_max = 0.0;
  for (int lp = 1; lp <= slot.L - 1; ++lp) {
    probe.L_p = lp;
    auto& row = rows[lp - 1];
    row.L_p = lp;
    row.capacity = ergodic_capacity(probe, comm).capacity;
    row.crb = ergodic_crb(sense, lp, mode);
    c_max = std::max(c_max, row.capacity);
  }
  const double crb_min = rows.back().crb;
  for (auto& row : rows) {
    row.capacity_ratio = row.capacity / c_max;
    row.crb_ratio = crb_min / row.crb;
    row.feasible = row.capacity_ratio >= cfg.u_c_th && row.crb_ratio >= cfg.u_d_th;
    row.utility = cfg.eta * row.capacity_ratio + (1.0 - cfg.eta) * row.crb_ratio;
  }
  return rows;
}

// Weighted sum of the normalised capacity and normalised inverse bound.
inline double utility(const SlotConfig& slot, const CommLink& comm, const SenseLink& sense,
                      const MetricConfig& cfg, int L_p,
                      PathLossMode mode = PathLossMode::range_derated) {
  if (L_p < 1 || L_p > slot.L - 1)
    throw std::domain_error("utility: L_p must lie in [1, L-1]");
  return pilot_profile(slot, comm, sense, cfg, mode)[L_p - 1].utility;
}

// Pilot counts whose normalised capacity and sensing ratios both clear
// their thresholds.  The empty set is a legitimate result.
inline std::vector<int> feasible_pilot_set(const SlotConfig& slot, const CommLink& comm,
                                           const SenseLink& sense, const MetricConfig& cfg,
                                           PathLossMode mode = PathLossMode::range_derated) {
  std::vector<int> out;
  for (const auto& row : pilot_profile(slot, comm, sense, cfg, mode))
    if (row.feasible) out.push_back(row.L_p);
  return out;
}

}  // namespace isac
