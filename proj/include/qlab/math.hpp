#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "qlab/errors.hpp"

namespace qlab {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Modified Bessel functions, exponentially scaled: i0e(x) = exp(-|x|) I0(x).
// Power series below the crossover, asymptotic expansion above; both
// evaluated to ~1e-13 relative so that d/dx I0 = I1 holds far below the
// 1e-6 Jacobian check tolerance.
// ---------------------------------------------------------------------------

namespace detail {
inline constexpr double kBesselCrossover = 20.0;
}

inline double bessel_i0e(double x) {
  x = std::fabs(x);
  if (x < detail::kBesselCrossover) {
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return sum * std::exp(-x);
  }
  // I0(x) ~ e^x/sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 40; ++k) {
    const double next = term * (2.0 * k + 1.0) * (2.0 * k + 1.0) /
                        (8.0 * x * (k + 1.0));
    if (next >= term) break;  // asymptotic series started diverging
    term = next;
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum / std::sqrt(2.0 * kPi * x);
}

inline double bessel_i1e(double x) {
  const double ax = std::fabs(x);
  double result;
  if (ax < detail::kBesselCrossover) {
    const double q = 0.25 * ax * ax;
    double term = 0.5 * ax, sum = term;
    for (int k = 1; k < 200; ++k) {
      term *= q / (static_cast<double>(k) * (k + 1.0));
      sum += term;
      if (term < sum * 1e-17) break;
    }
    result = sum * std::exp(-ax);
  } else {
    // signed term ratio t_{k+1}/t_k = ((2k+1)^2 - 4) / (8x (k+1))
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 40; ++k) {
      const double factor =
          ((2.0 * k + 1.0) * (2.0 * k + 1.0) - 4.0) / (8.0 * ax * (k + 1.0));
      const double next = term * factor;
      if (std::fabs(next) >= std::fabs(term)) break;
      term = next;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
    }
    result = sum / std::sqrt(2.0 * kPi * ax);
  }
  return x < 0 ? -result : result;
}

// log I0(x), overflow-free.
inline double log_bessel_i0(double x) {
  x = std::fabs(x);
  return x + std::log(bessel_i0e(x));
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod 7/15 quadrature.
// ---------------------------------------------------------------------------

namespace detail {

// QUADPACK dqk15 nodes/weights on [-1, 1].
inline constexpr std::array<double, 8> kGk15Nodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr std::array<double, 8> kGk15Weights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> kGauss7Weights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <class F>
inline void gk15(const F& f, double a, double b, double& kronrod,
                 double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = h * kGk15Nodes[i];
    const double fsum =
        (i == 7) ? f(c) : f(c - dx) + f(c + dx);
    resk += kGk15Weights[i] * fsum;
    if (i % 2 == 1) resg += kGauss7Weights[i / 2] * fsum;
  }
  kronrod = resk * h;
  err = std::fabs((resk - resg) * h);
}

}  // namespace detail

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
};

// Integrate f over [a, b] to the requested relative tolerance (with a small
// absolute floor for integrals near zero). Recursive bisection with per-
// interval error budget.
template <class F>
QuadratureResult integrate(const F& f, double a, double b,
                           double rel_tol = 1e-10, double abs_tol = 1e-300) {
  struct Interval {
    double a, b, value, err;
  };
  // start from a 16-way split so features the endpoints would hide still
  // register in the error estimate; genuinely narrow integrands must be
  // bracketed by the caller
  std::vector<Interval> stack;
  double total = 0.0, total_err = 0.0;
  const int n_init = 16;
  for (int i = 0; i < n_init; ++i) {
    Interval iv{a + (b - a) * i / n_init, a + (b - a) * (i + 1) / n_init, 0, 0};
    detail::gk15(f, iv.a, iv.b, iv.value, iv.err);
    total += iv.value;
    total_err += iv.err;
    stack.push_back(iv);
  }
  int splits = 0;
  const int max_splits = 2000;
  while (!stack.empty() && splits < max_splits) {
    const double tol = std::max(abs_tol, rel_tol * std::fabs(total));
    // worst interval first
    auto worst = std::max_element(
        stack.begin(), stack.end(),
        [](const Interval& u, const Interval& v) { return u.err < v.err; });
    if (total_err <= tol) break;
    Interval cur = *worst;
    stack.erase(worst);
    const double mid = 0.5 * (cur.a + cur.b);
    Interval left{cur.a, mid, 0, 0}, right{mid, cur.b, 0, 0};
    detail::gk15(f, left.a, left.b, left.value, left.err);
    detail::gk15(f, right.a, right.b, right.value, right.err);
    total += left.value + right.value - cur.value;
    total_err += left.err + right.err - cur.err;
    stack.push_back(left);
    stack.push_back(right);
    ++splits;
  }
  return {total, total_err, static_cast<int>(stack.size())};
}

// ---------------------------------------------------------------------------
// Basic sample statistics.
// ---------------------------------------------------------------------------

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw InsufficientDataError("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InsufficientDataError("variance: need >= 2 samples");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double stddev(std::span<const double> xs) {
  return std::sqrt(variance(xs));
}

// Fisher's g1 (population moment ratio).
inline double skewness(std::span<const double> xs) {
  if (xs.size() < 3) throw InsufficientDataError("skewness: need >= 3 samples");
  const double m = mean(xs);
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  const double n = static_cast<double>(xs.size());
  m2 /= n;
  m3 /= n;
  if (m2 <= 0) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

// ---------------------------------------------------------------------------
// Small dense linear algebra (fit problems have <= 6 parameters).
// ---------------------------------------------------------------------------

// Solve A x = b in place; A is n x n row-major. Gaussian elimination with
// partial pivoting.
inline std::vector<double> solve_dense(std::vector<double> a,
                                       std::vector<double> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n) throw Error("solve_dense: shape mismatch");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::fabs(a[perm[col] * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::fabs(a[perm[r] * n + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) throw Error("solve_dense: singular matrix");
    std::swap(perm[col], perm[piv]);
    const std::size_t prow = perm[col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const std::size_t row = perm[r];
      const double factor = a[row * n + col] / a[prow * n + col];
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[row * n + c] -= factor * a[prow * n + c];
      b[row] -= factor * b[prow];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t row = perm[i];
    double s = b[row];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[row * n + c] * x[c];
    x[i] = s / a[row * n + i];
  }
  return x;
}

// Inverse via n solves; only used for covariance matrices at fit optima.
inline std::vector<double> invert_dense(const std::vector<double>& a,
                                        std::size_t n) {
  std::vector<double> inv(n * n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> e(n, 0.0);
    e[col] = 1.0;
    const std::vector<double> x = solve_dense(a, e);
    for (std::size_t r = 0; r < n; ++r) inv[r * n + col] = x[r];
  }
  return inv;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
};

// Ordinary least squares y = intercept + slope x.
inline LinearFit linear_regression(std::span<const double> x,
                                   std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InsufficientDataError("linear_regression: need >= 2 paired samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw DegenerateDataError("linear_regression: constant abscissa");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      ssr += r * r;
    }
    const double s2 = ssr / (n - 2.0);
    fit.slope_stderr = std::sqrt(s2 * n / denom);
    fit.intercept_stderr = std::sqrt(s2 * sxx / denom);
  }
  return fit;
}

}  // namespace qlab
