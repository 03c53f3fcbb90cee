#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "errors.hpp"

namespace isac {

struct QuadSpec {
  double relative_tolerance = 1e-10;
  int max_subdivisions = 2000;

  void validate() const {
    if (!(relative_tolerance > 0.0) || relative_tolerance > 1e-3)
      throw std::invalid_argument("QuadSpec: relative_tolerance must lie in (0, 1e-3]");
    if (max_subdivisions < 1)
      throw std::invalid_argument("QuadSpec: max_subdivisions must be >= 1");
  }
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].  Odd-indexed Kronrod
// nodes (plus the centre) coincide with the embedded Gauss rule.
inline constexpr double kron_nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kron_weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double gauss_weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelEstimate {
  double integral;
  double error;
};

// One Gauss-Kronrod panel with the classic rescaled error model: the raw
// |K15 - G7| gap is sharpened by (200*gap/resasc)^1.5 so smooth panels are
// not charged the worst-case rate.
template <class F>
PanelEstimate gk15(F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);

  double flo[7], fhi[7];
  const double fc = f(mid);
  double resk = kron_weights[7] * fc;
  double resg = gauss_weights[3] * fc;
  double resabs = kron_weights[7] * std::abs(fc);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kron_nodes[j];
    flo[j] = f(mid - dx);
    fhi[j] = f(mid + dx);
    const double pair = flo[j] + fhi[j];
    resk += kron_weights[j] * pair;
    resabs += kron_weights[j] * (std::abs(flo[j]) + std::abs(fhi[j]));
    if (j % 2 == 1) resg += gauss_weights[(j - 1) / 2] * pair;
  }

  const double reskh = 0.5 * resk;
  double resasc = kron_weights[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kron_weights[j] * (std::abs(flo[j] - reskh) + std::abs(fhi[j] - reskh));

  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  if (resabs > uflow / (50.0 * eps)) err = std::max(err, 50.0 * eps * resabs);

  return {resk * half, err};
}

}  // namespace detail

// Adaptive evaluation of the improper integral of f over (0, inf) for
// absolutely integrable f.  The rational substitution s = t/(1-t) maps the
// half-line onto (0,1); the panel with the largest error estimate is split
// first until the summed error meets the relative tolerance.
template <class F>
double integrate_semi_infinite(F&& f, const QuadSpec& spec = {}) {
  spec.validate();

  auto g = [&f](double t) {
    const double u = 1.0 - t;
    const double fs = f(t / u);
    // Once f has underflowed to zero the Jacobian 1/u^2 must not revive it
    // into 0*inf = nan near t = 1.
    return fs == 0.0 ? 0.0 : fs / (u * u);
  };

  struct Segment {
    double a, b, integral, error;
  };
  auto cooler = [](const Segment& l, const Segment& r) { return l.error < r.error; };

  std::vector<Segment> segments;
  segments.reserve(64);
  auto add = [&](double a, double b) {
    const auto p = detail::gk15(g, a, b);
    segments.push_back({a, b, p.integral, p.error});
    std::push_heap(segments.begin(), segments.end(), cooler);
  };

  add(0.0, 1.0);
  for (int splits = 0;; ++splits) {
    double total = 0.0, err = 0.0;
    for (const auto& s : segments) {
      total += s.integral;
      err += s.error;
    }
    if (!std::isfinite(total))
      throw convergence_error("integrate_semi_infinite: integrand produced a non-finite value");
    if (err <= spec.relative_tolerance * std::abs(total)) return total;
    if (splits >= spec.max_subdivisions)
      throw convergence_error(
          "integrate_semi_infinite: subdivision budget exhausted before reaching the "
          "requested relative tolerance");

    std::pop_heap(segments.begin(), segments.end(), cooler);
    const Segment worst = segments.back();
    segments.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b))
      throw convergence_error("integrate_semi_infinite: interval too narrow to split further");
    add(worst.a, mid);
    add(mid, worst.b);
  }
}

}  // namespace isac
