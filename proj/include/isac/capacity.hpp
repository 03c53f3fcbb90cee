#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "channel.hpp"
#include "quadrature.hpp"
#include "special.hpp"

namespace isac {

enum class CapacityForm { closed, integral };

struct CapacityResult {
  double capacity = 0.0;  // Hz * symbols * bits/symbol
  double e_d_used = 0.0;
  CapacityForm form = CapacityForm::closed;
};

namespace detail {

// Fading average of ln(1 + SINR) expressed through omega(y) = e^y Ei(-y):
//   [omega(1/(gamma_d e_d)) - omega(1/(gamma_d sigma1_sq))] / (1 - e_d/sigma1_sq).
// The bracket and the denominator vanish together as e_d -> sigma1_sq, so
// inside a narrow window the ratio is evaluated by a Taylor expansion of
// omega around y1 instead of as 0/0.  Derivatives of omega are analytic:
// omega' = omega + 1/y, omega'' = omega' - 1/y^2, omega''' = omega'' + 2/y^3.
inline double capacity_log_mean(double gamma_d, double sigma1_sq, double e_d) {
  if (!(e_d > 0.0)) throw std::domain_error("capacity: e_d must be > 0");
  if (std::abs(e_d - sigma1_sq) <= 1e-12)
    throw std::domain_error("capacity: e_d within 1e-12 of sigma1_sq (degenerate closed form)");

  const double y1 = 1.0 / (gamma_d * sigma1_sq);
  const double eps = 1.0 - e_d / sigma1_sq;
  if (std::abs(eps) < 1e-6) {
    const double w = ei_exp_scaled(y1);
    const double w1 = w + 1.0 / y1;
    const double w2 = w1 - 1.0 / (y1 * y1);
    const double w3 = w2 + 2.0 / (y1 * y1 * y1);
    const double f = 1.0 - eps;  // y_d - y1 = y1 * eps / f
    const double t1 = w1 * y1 / f;
    const double t2 = 0.5 * w2 * y1 * y1 * eps / (f * f);
    const double t3 = w3 * y1 * y1 * y1 * eps * eps / (6.0 * f * f * f);
    return t1 + t2 + t3;
  }
  const double yd = 1.0 / (gamma_d * e_d);
  return (ei_exp_scaled(yd) - ei_exp_scaled(y1)) / eps;
}

inline double rate_prefactor(double B, double L, double pilot_len) {
  return B * (L - pilot_len) / std::numbers::ln2;
}

}  // namespace detail

// Ergodic capacity, closed form, with a caller-supplied error power
// (testing and limit studies; the public path derives e_d from the link).
inline CapacityResult ergodic_capacity_with_error(const SlotConfig& slot, const CommLink& link,
                                                  double e_d) {
  slot.validate();
  link.validate();
  const double mean_log = detail::capacity_log_mean(link.gamma_d, link.sigma1_sq, e_d);
  return {detail::rate_prefactor(slot.B, slot.L, slot.L_p) * mean_log, e_d, CapacityForm::closed};
}

// Ergodic capacity of the data symbols under imperfect channel estimation,
// canonical closed form.
inline CapacityResult ergodic_capacity(const SlotConfig& slot, const CommLink& link) {
  slot.validate();
  link.validate();
  return ergodic_capacity_with_error(slot, link, data_error(link, slot.L_p));
}

// Continuous relaxation over a real pilot length in [1, L-1]; this is the
// objective the fractional-programming optimizer climbs.
inline double ergodic_capacity_relaxed(const SlotConfig& slot, const CommLink& link,
                                       double pilot_len) {
  if (!(pilot_len >= 1.0 && pilot_len <= slot.L - 1.0))
    throw std::domain_error("ergodic_capacity_relaxed: pilot_len must lie in [1, L-1]");
  const double e_d = data_error(link, pilot_len);
  const double mean_log = detail::capacity_log_mean(link.gamma_d, link.sigma1_sq, e_d);
  return detail::rate_prefactor(slot.B, slot.L, pilot_len) * mean_log;
}

// Same quantity through the defining integral
//   E[ln(1+SINR)] = gamma_d sigma1_sq Int_0^inf e^{-s} /
//                   ((1 + gamma_d sigma1_sq s)(1 + gamma_d e_d s)) ds,
// evaluated by adaptive quadrature.  Unlike the closed form this stays
// finite at e_d = sigma1_sq, which is how the removable singularity of the
// bracket is cross-checked.
inline CapacityResult ergodic_capacity_integral_with_error(const SlotConfig& slot,
                                                           const CommLink& link, double e_d,
                                                           const QuadSpec& quad = {}) {
  slot.validate();
  link.validate();
  if (!(e_d > 0.0)) throw std::domain_error("capacity: e_d must be > 0");
  const double gd = link.gamma_d;
  const double s1 = link.sigma1_sq;
  const double mean_log = gd * s1 * integrate_semi_infinite(
                                        [gd, s1, e_d](double s) {
                                          return std::exp(-s) /
                                                 ((1.0 + gd * s1 * s) * (1.0 + gd * e_d * s));
                                        },
                                        quad);
  return {detail::rate_prefactor(slot.B, slot.L, slot.L_p) * mean_log, e_d,
          CapacityForm::integral};
}

inline CapacityResult ergodic_capacity_integral(const SlotConfig& slot, const CommLink& link,
                                                const QuadSpec& quad = {}) {
  slot.validate();
  link.validate();
  return ergodic_capacity_integral_with_error(slot, link, data_error(link, slot.L_p), quad);
}

// Variant closed form that keeps the first exponential-integral argument as
// (1 + gamma_p L_p)/gamma_d, i.e. without the channel-variance factor inside.
// It coincides with the canonical form only when sigma1_sq = 1; it exists so
// the two can be compared explicitly, and is never used by the sweeps unless
// selected in the configuration.
inline double ergodic_capacity_as_printed(const SlotConfig& slot, const CommLink& link) {
  slot.validate();
  link.validate();
  const double y_first = (1.0 + link.gamma_p * slot.L_p) / link.gamma_d;
  const double y1 = 1.0 / (link.gamma_d * link.sigma1_sq);
  const double denom = 1.0 - 1.0 / (1.0 + link.sigma1_sq * link.gamma_p * slot.L_p);
  return detail::rate_prefactor(slot.B, slot.L, slot.L_p) *
         (ei_exp_scaled(y_first) - ei_exp_scaled(y1)) / denom;
}

// Discrete concavity diagnostic: C(L_p-1) - 2 C(L_p) + C(L_p+1) for every
// interior pilot count.  All entries should be <= 0 up to rounding slack.
inline std::vector<double> capacity_second_difference(const SlotConfig& slot,
                                                      const CommLink& link) {
  slot.validate();
  link.validate();
  if (slot.L < 4)
    throw std::invalid_argument("capacity_second_difference: needs L >= 4");
  std::vector<double> diffs;
  diffs.reserve(slot.L - 3);
  SlotConfig probe = slot;
  auto c_at = [&](int lp) {
    probe.L_p = lp;
    return ergodic_capacity(probe, link).capacity;
  };
  double prev = c_at(1), cur = c_at(2);
  for (int lp = 2; lp <= slot.L - 2; ++lp) {
    const double next = c_at(lp + 1);
    diffs.push_back(prev - 2.0 * cur + next);
    prev = cur;
    cur = next;
  }
  return diffs;
}

}  // namespace isac
