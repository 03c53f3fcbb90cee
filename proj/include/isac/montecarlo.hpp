#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "rng.hpp"
#include "sensing.hpp"

namespace isac {

struct McSpec {
  std::int64_t n_samples = 1000000;
  std::uint64_t master_seed = 123456789;
  std::uint64_t stream_id = 0;

  void validate() const {
    if (n_samples < 1) throw std::invalid_argument("McSpec: n_samples must be >= 1");
  }
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
};

namespace detail {

inline void kahan_add(double& sum, double& comp, double v) {
  const double y = v - comp;
  const double t = sum + y;
  comp = (t - sum) - y;
  sum = t;
}

// Mean / standard error of sample(rng) over n_samples draws.
//
// Determinism contract: samples are cut into fixed-size blocks; block b is
// generated from substream(b) regardless of which worker runs it, and block
// partial sums are combined in block order.  The result is therefore
// bit-identical for every worker count, including 1.
template <class Fn>
McEstimate mc_mean(const McSpec& mc, int workers, Fn&& sample) {
  mc.validate();
  if (workers < 1) throw std::invalid_argument("mc_mean: workers must be >= 1");

  constexpr std::int64_t block_len = 1 << 16;
  const std::int64_t n = mc.n_samples;
  const std::int64_t n_blocks = (n + block_len - 1) / block_len;

  struct Partial {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  std::vector<Partial> partials(static_cast<std::size_t>(n_blocks));
  const RngStream base(mc.master_seed, mc.stream_id);

  auto run_block = [&](std::int64_t b) {
    RngStream rng = base.substream(static_cast<std::uint64_t>(b));
    const std::int64_t count = std::min(block_len, n - b * block_len);
    double s = 0.0, sc = 0.0, q = 0.0, qc = 0.0;
    for (std::int64_t i = 0; i < count; ++i) {
      const double v = sample(rng);
      kahan_add(s, sc, v);
      kahan_add(q, qc, v * v);
    }
    partials[static_cast<std::size_t>(b)] = {s + sc, q + qc};
  };

  if (workers == 1 || n_blocks == 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::int64_t> next{0};
    auto drain = [&] {
      for (;;) {
        const std::int64_t b = next.fetch_add(1);
        if (b >= n_blocks) return;
        run_block(b);
      }
    };
    std::vector<std::thread> pool;
    const int extra = static_cast<int>(std::min<std::int64_t>(workers - 1, n_blocks - 1));
    pool.reserve(static_cast<std::size_t>(extra));
    for (int w = 0; w < extra; ++w) pool.emplace_back(drain);
    drain();
    for (auto& t : pool) t.join();
  }

  double sum = 0.0, sum_c = 0.0, sq = 0.0, sq_c = 0.0;
  for (const auto& p : partials) {
    kahan_add(sum, sum_c, p.sum);
    kahan_add(sq, sq_c, p.sum_sq);
  }
  sum += sum_c;
  sq += sq_c;

  McEstimate est;
  est.n = n;
  est.mean = sum / static_cast<double>(n);
  if (n > 1) {
    const double m2 = std::max(0.0, sq - static_cast<double>(n) * est.mean * est.mean);
    est.std_error = std::sqrt(m2 / (static_cast<double>(n - 1) * static_cast<double>(n)));
  }
  return est;
}

}  // namespace detail

// Brute-force estimate of the ergodic capacity: sample mean of
//   B (L - L_p) log2(1 + gamma_d g / (1 + gamma_d w)),
// g the estimated-channel power and w the residual-noise power.  By default
// g has mean sigma1_sq, matching the closed form's distributional
// assumptions; mmse_orthogonal_variance = true switches g to mean
// sigma1_sq - e_d (the orthogonality-principle variant) for sensitivity
// comparison — that variant is NOT expected to match the closed form.
inline McEstimate mc_ergodic_capacity(const SlotConfig& slot, const CommLink& link,
                                      const McSpec& mc, int workers = 1,
                                      bool mmse_orthogonal_variance = false) {
  slot.validate();
  link.validate();
  const double e_d = data_error(link, slot.L_p);
  const double gain_mean = mmse_orthogonal_variance ? link.sigma1_sq - e_d : link.sigma1_sq;
  const double gd = link.gamma_d;
  const double scale = slot.B * (slot.L - slot.L_p) / std::numbers::ln2;
  return detail::mc_mean(mc, workers, [=](RngStream& rng) {
    const double g = rng.exponential(gain_mean);
    const double w = sample_estimation_noise_power(e_d, rng);
    return scale * std::log1p(gd * g / (1.0 + gd * w));
  });
}

// Brute-force estimate of the fading-averaged range bound: sample mean of
// alpha / (L_p X) over Rician amplitude draws.  Deep fades (X near 0) are
// kept — the amplitude density vanishes linearly at 0, so E[1/X] is finite
// and truncation would bias the estimate.
inline McEstimate mc_ergodic_crb(const SenseLink& sense, int L_p, const McSpec& mc,
                                 int workers = 1,
                                 PathLossMode mode = PathLossMode::range_derated) {
  if (L_p < 1) throw std::domain_error("mc_ergodic_crb: L_p must be >= 1");
  const double alpha = alpha_coeff(sense, mode);
  const double a_s = sense.A_s;
  const double s2 = sense.sigma2_sq;
  const double pref = alpha / L_p;
  return detail::mc_mean(mc, workers, [=](RngStream& rng) {
    return pref / sample_rician_gain(a_s, s2, rng);
  });
}

// One generated slot of baseband samples.
struct SlotTrace {
  std::vector<std::complex<double>> pilot_rx;  // length L_p
  std::vector<std::complex<double>> data_rx;   // length L - L_p
  std::vector<std::complex<double>> echo_rx;   // length L_p
  double true_range = 0.0;                     // m; echo delay is 2*true_range/c
  double true_speed = 0.0;                     // m/s
};

// Generates the three received sequences in normalised units (unit transmit
// power per symbol; noise variances are the SNR reciprocals, so infinite
// SNRs yield exactly noiseless samples).  Pilots are unit-modulus with
// random phase, data symbols unit-power complex Gaussian.  The echo carries
// the spherical-spreading amplitude sqrt(s_rcs / (4 pi d^2)), the Rician
// sensing fade, and the Doppler phase exp(j 4 pi v t / lambda); the delay
// 2d/c is reported as metadata rather than resampled.
//
// Draw order per slot (one stream, fixed): all pilot phases; per pilot
// symbol its fade then noise; per data symbol its symbol, fade, then noise;
// per echo symbol its sensing fade then noise.
inline SlotTrace simulate_slot(const SlotConfig& slot, const CommLink& comm,
                               const SenseLink& sense, const McSpec& mc) {
  slot.validate();
  comm.validate();
  sense.validate();
  mc.validate();

  RngStream rng(mc.master_seed, mc.stream_id);
  const int n_pilot = slot.L_p;
  const int n_data = slot.L - slot.L_p;

  auto cgauss = [&rng](double var) {
    const auto [re, im] = rng.normal_pair();
    const double sd = std::sqrt(0.5 * var);
    return std::complex<double>(sd * re, sd * im);
  };

  std::vector<std::complex<double>> x_p(n_pilot);
  for (auto& x : x_p) x = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform01());

  SlotTrace trace;
  trace.true_range = sense.d;
  trace.true_speed = sense.v;

  trace.pilot_rx.resize(n_pilot);
  const double pilot_noise_var = std::isinf(comm.gamma_p) ? 0.0 : 1.0 / comm.gamma_p;
  for (int t = 0; t < n_pilot; ++t) {
    const auto h = cgauss(comm.sigma1_sq);
    trace.pilot_rx[t] = h * x_p[t] + cgauss(pilot_noise_var);
  }

  trace.data_rx.resize(n_data);
  const double data_noise_var = std::isinf(comm.gamma_d) ? 0.0 : 1.0 / comm.gamma_d;
  for (int t = 0; t < n_data; ++t) {
    const auto x_d = cgauss(1.0);
    const auto h = cgauss(comm.sigma1_sq);
    trace.data_rx[t] = h * x_d + cgauss(data_noise_var);
  }

  trace.echo_rx.resize(n_pilot);
  const double echo_amp = std::sqrt(sense.s_rcs / (4.0 * std::numbers::pi * sense.d * sense.d));
  const double echo_noise_var = std::isinf(sense.gamma_ps) ? 0.0 : 1.0 / sense.gamma_ps;
  const double los = std::sqrt(sense.A_s);
  const double diffuse_sd = std::sqrt(sense.sigma2_sq);
  for (int t = 0; t < n_pilot; ++t) {
    const auto [n1, n2] = rng.normal_pair();
    const std::complex<double> h_s(los + diffuse_sd * n1, diffuse_sd * n2);
    const double doppler = 4.0 * std::numbers::pi * sense.v * (t + 1) / sense.lambda;
    trace.echo_rx[t] =
        echo_amp * h_s * x_p[t] * std::polar(1.0, doppler) + cgauss(echo_noise_var);
  }
  return trace;
}

}  // namespace isac
