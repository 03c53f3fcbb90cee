#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace isac {
namespace detail {

inline constexpr std::uint64_t golden64 = 0x9E3779B97F4A7C15ull;

// splitmix64 finaliser: full-avalanche 64-bit diffusion.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

// Counter-based random stream: the i-th draw is a pure function of
// (key, i), so any block of draw indices can be regenerated independently
// of every other block.  That property is what makes the Monte Carlo
// reductions worker-count-independent.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : key_(derive(detail::mix64(master_seed + detail::golden64), stream_id)) {}

  // Child stream with a decorrelated key; used for per-block replay.
  RngStream substream(std::uint64_t child_id) const { return RngStream(derive(key_, child_id)); }

  std::uint64_t next_u64() { return detail::mix64(key_ + ++counter_ * detail::golden64); }

  // Uniform on the open interval (0,1): midpoints of 2^53 equal cells, so
  // neither endpoint is ever produced and log(u) is always finite.
  double uniform01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53; }

  // Exponential with the given mean; mean 0 is the legitimate degenerate
  // distribution concentrated at 0.
  double exponential(double mean) {
    if (mean == 0.0) return 0.0;
    return -mean * std::log(uniform01());
  }

  // Box-Muller pair of independent standard normals (always consumes
  // exactly two uniforms; no cached spare, so draw indices stay aligned).
  std::pair<double, double> normal_pair() {
    const double r = std::sqrt(-2.0 * std::log(uniform01()));
    const double a = 2.0 * std::numbers::pi * uniform01();
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  static constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t id) {
    return detail::mix64(key ^ detail::mix64(id + 0x6A09E667F3BCC909ull));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace isac
