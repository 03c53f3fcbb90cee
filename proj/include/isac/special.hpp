#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "errors.hpp"

namespace isac {
namespace detail {

// Power series for E1 on (0, 1]:
//   E1(x) = -gamma_E - ln x - sum_{k>=1} (-x)^k / (k * k!).
// Terms alternate and shrink fast here, so cancellation stays below a few ulp.
inline double e1_series(double x) {
  double p = 1.0;  // (-x)^k / k!
  double s = 0.0;
  for (int k = 1; k <= 64; ++k) {
    p *= -x / k;
    const double t = p / k;
    s += t;
    if (std::abs(t) <= std::numeric_limits<double>::epsilon() * std::abs(s)) break;
  }
  return -std::numbers::egamma - std::log(x) - s;
}

// Modified Lentz continued fraction for x >= 1.  Returns F(x) with
// E1(x) = exp(-x) * F(x); keeping the exponential factored out is what lets
// callers form exp(y)*Ei(-y) without overflow.
inline double e1_cf_scaled(double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k <= 100000; ++k) {
    const double a = -static_cast<double>(k) * static_cast<double>(k);
    b += 2.0;
    d = a * d + b;
    if (d == 0.0) d = tiny;
    c = b + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 4.0 * std::numeric_limits<double>::epsilon()) return h;
  }
  throw convergence_error("e1_cf_scaled: continued fraction did not settle");
}

}  // namespace detail

// Exponential integral Ei(x), restricted to strictly negative arguments
// (the only region this library evaluates).  Strictly increasing in |x|
// toward 0 from below; tends to 0^- as x -> -inf.
inline double ei(double x) {
  if (!(x < 0.0)) throw std::domain_error("ei: argument must be strictly negative");
  const double y = -x;
  if (std::isinf(y)) return -0.0;
  if (y <= 1.0) return -detail::e1_series(y);
  return -std::exp(-y) * detail::e1_cf_scaled(y);
}

// omega(y) = exp(y) * Ei(-y) for y > 0, evaluated without forming exp(y).
// This is the building block of the capacity closed form; it stays in
// (-inf, 0) and behaves like -1/y for large y.
inline double ei_exp_scaled(double y) {
  if (!(y > 0.0)) throw std::domain_error("ei_exp_scaled: argument must be strictly positive");
  if (std::isinf(y)) return -0.0;
  if (y <= 1.0) return -std::exp(y) * detail::e1_series(y);
  return -detail::e1_cf_scaled(y);
}

// Modified Bessel function I0.  The platform libm kernel is accurate to a
// couple of ulp over the range used here; this wrapper adds the domain and
// overflow contract the callers rely on.
inline double bessel_i0(double x) {
  if (!(x >= 0.0)) throw std::domain_error("bessel_i0: argument must be nonnegative");
  if (x > 713.0) throw std::overflow_error("bessel_i0: result exceeds double range");
  const double v = std::cyl_bessel_i(0.0, x);
  if (!std::isfinite(v)) throw std::overflow_error("bessel_i0: result exceeds double range");
  return v;
}

// Kummer confluent hypergeometric 1F1(1/2; 1; x) for x >= 0 by direct
// summation; term ratio is (k + 1/2) x / (k + 1)^2.  All terms are positive,
// so a compensated sum keeps the long tail from dropping low bits.
inline double hyp1f1_half(double x) {
  if (!(x >= 0.0)) throw std::domain_error("hyp1f1_half: argument must be nonnegative");
  if (std::isinf(x)) throw std::overflow_error("hyp1f1_half: result exceeds double range");
  double term = 1.0;
  double sum = 1.0;
  double comp = 0.0;
  for (int k = 0; k < 4000; ++k) {
    term *= (k + 0.5) * x / ((k + 1.0) * (k + 1.0));
    if (!std::isfinite(term) || !std::isfinite(sum))
      throw std::overflow_error("hyp1f1_half: result exceeds double range");
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (term <= 1e-16 * sum) return sum;
  }
  throw convergence_error("hyp1f1_half: term ratio did not fall below 1e-16 within the term budget");
}

}  // namespace isac
