#pragma once

#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace isac {

// Rayleigh-fading communication link.  Raw transmit powers and noise
// variances appear only through the two SNR ratios.
struct CommLink {
  double sigma1_sq = 2.0;  // mean-square channel gain
  double gamma_p = 10.0;   // pilot SNR, linear
  double gamma_d = 10.0;   // data SNR, linear

  void validate() const {
    if (!(sigma1_sq > 0.0)) throw std::invalid_argument("CommLink: sigma1_sq must be > 0");
    if (!(gamma_p > 0.0)) throw std::invalid_argument("CommLink: gamma_p must be > 0");
    if (!(gamma_d > 0.0)) throw std::invalid_argument("CommLink: gamma_d must be > 0");
  }
};

// Slot layout: L symbols total, the first L_p of them pilots.
struct SlotConfig {
  int L = 14;
  int L_p = 7;
  double B = 2e8;  // bandwidth, Hz

  void validate() const {
    if (L < 2) throw std::invalid_argument("SlotConfig: L must be >= 2");
    if (L_p < 1 || L_p > L - 1)
      throw std::invalid_argument("SlotConfig: L_p must lie in [1, L-1]");
    if (!(B > 0.0)) throw std::invalid_argument("SlotConfig: B must be > 0");
  }
};

// Expected LS estimation error of the pilot channels.
inline double pilot_error(const CommLink& link) { return 1.0 / link.gamma_p; }

// Expected interpolation error of the data channels.  Written in the
// cancellation-free form var/(1 + var*snr*n) instead of the difference of
// two nearly equal terms; pilot_len is real-valued so the optimizer can
// evaluate the continuous relaxation.
inline double data_error(const CommLink& link, double pilot_len) {
  if (!(pilot_len >= 1.0)) throw std::domain_error("data_error: pilot_len must be >= 1");
  return link.sigma1_sq / (1.0 + link.sigma1_sq * link.gamma_p * pilot_len);
}

// Draw of the estimated data-channel power: exponential with mean sigma1_sq.
inline double sample_estimated_channel_power(const CommLink& link, RngStream& rng) {
  return rng.exponential(link.sigma1_sq);
}

// Draw of the residual-estimation-noise power: exponential with mean e_d.
inline double sample_estimation_noise_power(double e_d, RngStream& rng) {
  if (!(e_d >= 0.0)) throw std::domain_error("sample_estimation_noise_power: e_d must be >= 0");
  return rng.exponential(e_d);
}

// Draw of the sensing-channel amplitude: magnitude of a fixed phasor of
// power A_s plus a complex Gaussian with per-component variance sigma2_sq.
// Sampling by construction is exact; the analytic density is only a test
// oracle.
inline double sample_rician_gain(double A_s, double sigma2_sq, RngStream& rng) {
  if (!(A_s >= 0.0)) throw std::domain_error("sample_rician_gain: A_s must be >= 0");
  if (!(sigma2_sq > 0.0)) throw std::domain_error("sample_rician_gain: sigma2_sq must be > 0");
  const auto [n1, n2] = rng.normal_pair();
  const double sd = std::sqrt(sigma2_sq);
  const double re = std::sqrt(A_s) + sd * n1;
  const double im = sd * n2;
  return std::sqrt(re * re + im * im);
}

}  // namespace isac
