#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "errors.hpp"
#include "special.hpp"

namespace isac {

// How the echo SNR entering the range bound is interpreted:
//   range_derated (default): the transmit-side echo SNR is first attenuated
//     by the spherical spreading factor 1/(4 pi d^2), which makes the range
//     field a functional knob;
//   transmit_only: the ratio is used as given, with no range dependence.
enum class PathLossMode { range_derated, transmit_only };

// Sensing link between the probing transmitter and the echo receiver.
struct SenseLink {
  double A_s = 3.0;          // line-of-sight power
  double sigma2_sq = 1.0;    // diffuse multipath power per component
  double s_rcs = 100.0;      // radar cross section, m^2
  double d = 100.0;          // range, m
  double c = 299792458.0;    // propagation speed, m/s
  double B_rms = 2e8 / 3.4641016151377544;  // rms bandwidth, Hz (B/sqrt(12))
  double gamma_ps = 10.0;    // echo SNR, linear
  double v = 0.0;            // target radial speed, m/s
  double lambda = 0.1;       // carrier wavelength, m
  double sigma_s_sq = 1.0;   // echo noise variance (trace metadata)

  void validate() const {
    if (!(A_s >= 0.0)) throw std::invalid_argument("SenseLink: A_s must be >= 0");
    if (!(sigma2_sq > 0.0)) throw std::invalid_argument("SenseLink: sigma2_sq must be > 0");
    if (!(s_rcs > 0.0)) throw std::invalid_argument("SenseLink: s_rcs must be > 0");
    if (!(d > 0.0)) throw std::invalid_argument("SenseLink: d must be > 0");
    if (!(c > 0.0)) throw std::invalid_argument("SenseLink: c must be > 0");
    if (!(B_rms > 0.0)) throw std::invalid_argument("SenseLink: B_rms must be > 0");
    if (!(gamma_ps > 0.0)) throw std::invalid_argument("SenseLink: gamma_ps must be > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("SenseLink: lambda must be > 0");
    if (!(sigma_s_sq >= 0.0)) throw std::invalid_argument("SenseLink: sigma_s_sq must be >= 0");
  }
};

// Range-bound coefficient alpha = c^2 / (8 pi^2 gamma s_rcs B_rms^2), in m^2,
// with gamma the (optionally range-derated) echo SNR.
inline double alpha_coeff(const SenseLink& link, PathLossMode mode = PathLossMode::range_derated) {
  link.validate();
  double g = link.gamma_ps;
  if (mode == PathLossMode::range_derated)
    g /= 4.0 * std::numbers::pi * link.d * link.d;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return link.c * link.c / (8.0 * pi2 * g * link.s_rcs * link.B_rms * link.B_rms);
}

// Range bound conditioned on one fading realisation of the sensing gain.
inline double instantaneous_crb(double alpha, int L_p, double gain) {
  if (!(alpha > 0.0)) throw std::domain_error("instantaneous_crb: alpha must be > 0");
  if (L_p < 1) throw std::domain_error("instantaneous_crb: L_p must be >= 1");
  if (!(gain > 0.0))
    throw std::domain_error("instantaneous_crb: gain must be > 0 (deep-fade draw)");
  return alpha / (L_p * gain);
}

namespace detail {

// E[1/X] for the Rician amplitude X:
//   sqrt(pi/(2 sigma2_sq)) * exp(-u) * 1F1(1/2; 1; u),  u = A_s/(2 sigma2_sq).
inline double rician_inverse_gain_mean(double A_s, double sigma2_sq) {
  const double u = A_s / (2.0 * sigma2_sq);
  return std::sqrt(std::numbers::pi / (2.0 * sigma2_sq)) * std::exp(-u) * hyp1f1_half(u);
}

// scale = alpha * E[1/X]; the fading-averaged bound is scale / L_p, so this
// is the quantity the continuous-pilot optimizer divides by x.
inline double ergodic_crb_scale(const SenseLink& link, PathLossMode mode) {
  return alpha_coeff(link, mode) * rician_inverse_gain_mean(link.A_s, link.sigma2_sq);
}

}  // namespace detail

// Fading-averaged range bound, closed form.
inline double ergodic_crb(const SenseLink& link, int L_p,
                          PathLossMode mode = PathLossMode::range_derated) {
  if (L_p < 1) throw std::domain_error("ergodic_crb: L_p must be >= 1");
  return detail::ergodic_crb_scale(link, mode) / L_p;
}

// Independent series route to the same expectation.  Each term is coded
// through lgamma so the construction shares nothing with hyp1f1_half:
//   delta = prefactor * sum_k  (1/2) (2 sigma2^2)^{k+1/2} u2^k Gamma(k+1/2)
//                              / (k! Gamma(k+1)),
// with u2 = A_s/(4 sigma2^4) and prefactor = alpha e^{-A_s/2sigma2^2} /
// (L_p sigma2^2).  Truncation: relative term below 1e-16, else a
// convergence error once the term budget is spent.
inline double ergodic_crb_series(const SenseLink& link, int L_p, int terms,
                                 PathLossMode mode = PathLossMode::range_derated) {
  if (L_p < 1) throw std::domain_error("ergodic_crb_series: L_p must be >= 1");
  if (terms < 1) throw std::domain_error("ergodic_crb_series: terms must be >= 1");
  link.validate();

  const double s2 = link.sigma2_sq;
  const double prefactor =
      alpha_coeff(link, mode) * std::exp(-link.A_s / (2.0 * s2)) / (L_p * s2);
  const double log_2s2 = std::log(2.0 * s2);

  double sum = 0.0;
  for (int k = 0; k < terms; ++k) {
    double term;
    if (k == 0) {
      term = 0.5 * std::sqrt(2.0 * s2) * std::sqrt(std::numbers::pi);  // Gamma(1/2) = sqrt(pi)
    } else {
      const double log_u2 = std::log(link.A_s / (4.0 * s2 * s2));
      term = 0.5 * std::exp((k + 0.5) * log_2s2 + k * log_u2 + std::lgamma(k + 0.5) -
                            2.0 * std::lgamma(k + 1.0));
    }
    sum += term;
    // A_s = 0 kills every k >= 1 term, so the k = 0 partial sum is exact.
    if (link.A_s == 0.0 || term <= 1e-16 * sum) return prefactor * sum;
  }
  throw convergence_error(
      "ergodic_crb_series: term ratio did not fall below 1e-16 within the term budget");
}

}  // namespace isac
