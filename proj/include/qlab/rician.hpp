#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qlab/errors.hpp"
#include "qlab/levmar.hpp"
#include "qlab/math.hpp"
#include "qlab/types.hpp"

namespace qlab {

// Mirrored Rician with an offset: the density of t is the Rician density of
// (t_max - t). t_max is both the support edge and a fit parameter.
struct RicianParams {
  double nu = 0.0;
  double sigma = 1.0;
  double t_max = 0.0;
};

inline void validate(const RicianParams& p) {
  if (!(p.sigma > 0.0))
    throw ValidationError("RicianParams: rule sigma > 0 violated");
  if (p.nu < 0.0) throw ValidationError("RicianParams: rule nu >= 0 violated");
}

// Standard Rician density, y >= 0. Written with the scaled Bessel so large
// y nu / sigma^2 cannot overflow.
inline double rician_pdf(double y, double nu, double sigma) {
  if (y <= 0.0) return 0.0;
  const double s2 = sigma * sigma;
  const double z = y * nu / s2;
  const double d = (y - nu) / sigma;
  return y / s2 * std::exp(-0.5 * d * d) * bessel_i0e(z);
}

inline double rician_log_pdf(double y, double nu, double sigma) {
  if (y <= 0.0) return -std::numeric_limits<double>::infinity();
  const double s2 = sigma * sigma;
  const double z = y * nu / s2;
  const double d = (y - nu) / sigma;
  return std::log(y) - std::log(s2) - 0.5 * d * d + std::log(bessel_i0e(z));
}

inline double mirrored_rician_pdf(double t, const RicianParams& p) {
  return t >= p.t_max ? 0.0 : rician_pdf(p.t_max - t, p.nu, p.sigma);
}

// d pdf / d {nu, sigma, t_max} at t; used by the histogram least-squares fit.
inline double mirrored_rician_pdf_grad(double t, const RicianParams& p,
                                       double grad[3]) {
  if (t >= p.t_max) {
    grad[0] = grad[1] = grad[2] = 0.0;
    return 0.0;
  }
  const double y = p.t_max - t;
  const double s2 = p.sigma * p.sigma;
  const double z = y * p.nu / s2;
  const double ratio = bessel_i1e(z) / bessel_i0e(z);  // I1/I0, scaled forms cancel
  const double f = rician_pdf(y, p.nu, p.sigma);
  grad[0] = f * (-p.nu / s2 + ratio * y / s2);
  grad[1] = f * (-2.0 / p.sigma + (y * y + p.nu * p.nu) / (s2 * p.sigma) -
                 ratio * 2.0 * y * p.nu / (s2 * p.sigma));
  grad[2] = f * (1.0 / y - y / s2 + ratio * p.nu / s2);
  return f;
}

// Analytic Rician mean: sigma sqrt(pi/2) L_{1/2}(-nu^2 / 2 sigma^2).
inline double rician_mean_analytic(double nu, double sigma) {
  const double x = nu * nu / (2.0 * sigma * sigma);
  const double laguerre =
      (1.0 + x) * bessel_i0e(0.5 * x) + x * bessel_i1e(0.5 * x);
  return sigma * std::sqrt(kPi / 2.0) * laguerre;
}

// ---------------------------------------------------------------------------
// Integration-based moments over t in [0, t_max]. The integrand support is
// clipped to nu +/- 45 sigma so near-degenerate (sigma -> 0) parameter sets
// stay cheap and accurate.
// ---------------------------------------------------------------------------

struct RicianMoments {
  double mean = 0.0;
  double stddev = 0.0;
  double mass = 0.0;  // density mass inside [0, t_max]
};

inline RicianMoments rician_moments(const RicianParams& p) {
  validate(p);
  const double y_lo = std::max(0.0, p.nu - 45.0 * p.sigma);
  const double y_hi = std::min(p.t_max, p.nu + 45.0 * p.sigma);
  if (!(y_hi > y_lo))
    throw ValidationError("rician_moments: no support inside [0, t_max]");
  const auto m0 = integrate(
      [&](double y) { return rician_pdf(y, p.nu, p.sigma); }, y_lo, y_hi, 1e-10);
  const auto m1 = integrate(
      [&](double y) { return y * rician_pdf(y, p.nu, p.sigma); }, y_lo, y_hi,
      1e-10);
  const auto m2 = integrate(
      [&](double y) { return y * y * rician_pdf(y, p.nu, p.sigma); }, y_lo,
      y_hi, 1e-10);
  if (!(m0.value > 0.0))
    throw ValidationError("rician_moments: zero mass inside [0, t_max]");
  const double mean_y = m1.value / m0.value;
  const double var_y = std::max(0.0, m2.value / m0.value - mean_y * mean_y);
  return {p.t_max - mean_y, std::sqrt(var_y), m0.value};
}

// CDF of the mirrored density at t (mass below t), by quadrature.
inline double mirrored_rician_cdf(double t, const RicianParams& p) {
  if (t >= p.t_max) return 1.0;
  const double y = p.t_max - t;  // mass below t == mass of Y above y
  const double y_hi = p.nu + 45.0 * p.sigma;
  if (y >= y_hi) return 0.0;
  const auto tail = integrate(
      [&](double u) { return rician_pdf(u, p.nu, p.sigma); }, y, y_hi, 1e-10);
  return std::clamp(tail.value, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

enum class RicianFitMethod { mle, histogram };

struct RicianFit {
  RicianParams params;
  FitResult fit;
  double ks_statistic = 0.0;
};

namespace detail {

// Method-of-moments starting point for (nu, sigma) given mean/variance of y.
inline void rician_mom_init(double m, double v, double& nu, double& sigma) {
  v = std::max(v, 1e-12 * std::max(m * m, 1e-300));
  const double q = m * m + v;  // E[y^2] = nu^2 + 2 sigma^2
  nu = std::sqrt(std::max(m * m - v, q * 1e-4));
  for (int it = 0; it < 40; ++it) {
    sigma = std::sqrt(std::max((q - nu * nu) * 0.5, q * 1e-8));
    const double model_mean = rician_mean_analytic(nu, sigma);
    if (model_mean <= 0.0) break;
    const double next = nu * std::min(std::max(m / model_mean, 0.5), 2.0);
    if (std::fabs(next - nu) < 1e-10 * (nu + 1e-300)) {
      nu = next;
      break;
    }
    nu = next;
  }
  sigma = std::sqrt(std::max((q - nu * nu) * 0.5, q * 1e-8));
}

// Compact Nelder-Mead for the 3-parameter likelihood.
template <class F>
inline bool nelder_mead(F&& f, std::vector<double>& x, int max_iter,
                        double xtol, double ftol) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> simplex(n + 1, x);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i)
    simplex[i + 1][i] += (x[i] != 0.0 ? 0.05 * std::fabs(x[i]) : 0.05);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  for (int iter = 0; iter < max_iter; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];

    double span = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      span = std::max(span, std::fabs(simplex[worst][i] - simplex[best][i]) /
                                (std::fabs(simplex[best][i]) + 1e-12));
    if (span < xtol && std::fabs(fv[worst] - fv[best]) <
                           ftol * (std::fabs(fv[best]) + 1e-12)) {
      x = simplex[best];
      return true;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k][i];
    }
    for (std::size_t i = 0; i < n; ++i) centroid[i] /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i)
        p[i] = centroid[i] + coef * (simplex[worst][i] - centroid[i]);
      return p;
    };
    const auto reflected = blend(-1.0);
    const double fr = f(reflected);
    if (fr < fv[best]) {
      const auto expanded = blend(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        fv[worst] = fe;
      } else {
        simplex[worst] = reflected;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = reflected;
      fv[worst] = fr;
    } else {
      const auto contracted = blend(fr < fv[worst] ? -0.5 : 0.5);
      const double fc = f(contracted);
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = contracted;
        fv[worst] = fc;
      } else {
        for (std::size_t k = 0; k <= n; ++k) {
          if (k == best) continue;
          for (std::size_t i = 0; i < n; ++i)
            simplex[k][i] = 0.5 * (simplex[k][i] + simplex[best][i]);
          fv[k] = f(simplex[k]);
        }
      }
    }
  }
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
  x = simplex[order[0]];
  return false;
}

}  // namespace detail

inline RicianFit fit_rician_mirrored(std::span<const double> samples,
                                     RicianFitMethod method = RicianFitMethod::mle) {
  if (samples.size() < 100)
    throw InsufficientDataError(
        "fit_rician_mirrored: need >= 100 samples (benchmark admission wants > 500)");

  RicianFit result;
  if (samples.size() <= 500)
    result.fit.flags.push_back("below_benchmark_floor");

  const double t_hi = *std::max_element(samples.begin(), samples.end());
  const double t_lo = *std::min_element(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const std::size_t n_bins =
      std::max<std::size_t>(10, static_cast<std::size_t>(std::ceil(std::sqrt(
                                    static_cast<double>(n)))));
  const double bin_width = (t_hi - t_lo) / static_cast<double>(n_bins);
  if (!(bin_width > 0.0))
    throw DegenerateDataError("fit_rician_mirrored: all samples identical");

  // t_max starts one bin above the largest sample; nu/sigma from moments
  double t_max0 = t_hi + bin_width;
  std::vector<double> y0(n);
  for (std::size_t i = 0; i < n; ++i) y0[i] = t_max0 - samples[i];
  double nu0, sigma0;
  detail::rician_mom_init(mean(y0), variance(y0), nu0, sigma0);

  if (method == RicianFitMethod::mle) {
    const auto nll = [&](const std::vector<double>& p) {
      const double nu = std::fabs(p[0]);  // density is even in nu
      const double sigma = p[1];
      const double t_max = p[2];
      if (!(sigma > 0.0) || !(t_max > t_hi)) return 1e290;
      double acc = 0.0;
      for (const double t : samples) acc -= rician_log_pdf(t_max - t, nu, sigma);
      return std::isfinite(acc) ? acc : 1e290;
    };
    std::vector<double> p{nu0, sigma0, t_max0};
    const bool ok = detail::nelder_mead(nll, p, 4000, 1e-9, 1e-12);
    result.params = {std::fabs(p[0]), p[1], p[2]};
    result.fit.converged = ok;
    if (!ok) result.fit.flags.push_back("not_converged");
    result.fit.residual_norm = nll(p);  // negative log likelihood

    // standard errors from the numerical NLL Hessian
    const std::vector<double> h = {
        std::max(1e-6 * (std::fabs(p[0]) + p[1]), 1e-9),
        std::max(1e-6 * p[1], 1e-12), std::max(1e-6 * p[1], 1e-12)};
    std::vector<double> hess(9, 0.0);
    const double f0 = nll(p);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b <= a; ++b) {
        auto shift = [&](int da, int db) {
          std::vector<double> q = p;
          q[a] += da * h[a];
          q[b] += db * h[b];
          return nll(q);
        };
        const double v =
            a == b ? (shift(1, 0) - 2.0 * f0 + shift(-1, 0)) / (h[a] * h[a])
                   : (shift(1, 1) - shift(1, -1) - shift(-1, 1) + shift(-1, -1)) /
                         (4.0 * h[a] * h[b]);
        hess[a * 3 + b] = hess[b * 3 + a] = v;
      }
    const char* names[3] = {"nu", "sigma", "t_max"};
    try {
      const auto cov = invert_dense(hess, 3);
      for (int a = 0; a < 3; ++a) {
        const double d = cov[a * 3 + a];
        result.fit.stderrs[names[a]] = d > 0 ? std::sqrt(d) : 0.0;
      }
    } catch (const Error&) {
      for (const char* nm : names) result.fit.stderrs[nm] = 0.0;
    }
  } else {
    // density-normalized histogram, least squares against the model density
    std::vector<double> centers(n_bins), density(n_bins, 0.0);
    for (std::size_t b = 0; b < n_bins; ++b)
      centers[b] = t_lo + (static_cast<double>(b) + 0.5) * bin_width;
    for (const double t : samples) {
      auto b = static_cast<std::size_t>((t - t_lo) / bin_width);
      if (b >= n_bins) b = n_bins - 1;
      density[b] += 1.0;
    }
    for (double& d : density) d /= static_cast<double>(n) * bin_width;

    const LmModel model = [&](const std::vector<double>& p,
                              std::vector<double>& r, std::vector<double>* jac) {
      const RicianParams rp{std::fabs(p[0]), p[1], p[2]};
      const bool bad = !(p[1] > 0.0) || !(p[2] > t_hi);
      for (std::size_t k = 0; k < n_bins; ++k) {
        if (bad) {
          r[k] = 1e6;
          if (jac) {
            (*jac)[k * 3] = (*jac)[k * 3 + 1] = (*jac)[k * 3 + 2] = 0.0;
          }
          continue;
        }
        double grad[3];
        const double f = mirrored_rician_pdf_grad(centers[k], rp, grad);
        r[k] = f - density[k];
        if (jac) {
          (*jac)[k * 3] = grad[0] * (p[0] < 0 ? -1.0 : 1.0);
          (*jac)[k * 3 + 1] = grad[1];
          (*jac)[k * 3 + 2] = grad[2];
        }
      }
    };
    const auto lm =
        levenberg_marquardt(model, {nu0, sigma0, t_max0}, n_bins);
    result.params = {std::fabs(lm.params[0]), lm.params[1], lm.params[2]};
    result.fit.converged = lm.converged;
    if (!lm.converged) result.fit.flags.push_back("not_converged");
    result.fit.residual_norm = lm.residual_norm;
    result.fit.stderrs["nu"] = lm.stderrs[0];
    result.fit.stderrs["sigma"] = lm.stderrs[1];
    result.fit.stderrs["t_max"] = lm.stderrs[2];
  }

  result.fit.params["nu"] = result.params.nu;
  result.fit.params["sigma"] = result.params.sigma;
  result.fit.params["t_max"] = result.params.t_max;

  if (result.params.nu > 10.0 * result.params.sigma)
    result.fit.flags.push_back("gaussian_limit_weak_identifiability");

  // Kolmogorov-Smirnov distance as the goodness-of-fit statistic. Bimodal or
  // otherwise mis-modeled inputs show up here rather than as a fit failure.
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double ks = 0.0;
  const std::size_t stride = std::max<std::size_t>(1, sorted.size() / 200);
  for (std::size_t i = 0; i < sorted.size(); i += stride) {
    const double cdf = mirrored_rician_cdf(sorted[i], result.params);
    const double lo_emp = static_cast<double>(i) / static_cast<double>(n);
    const double hi_emp = static_cast<double>(i + 1) / static_cast<double>(n);
    ks = std::max(ks, std::max(std::fabs(cdf - lo_emp), std::fabs(cdf - hi_emp)));
  }
  result.ks_statistic = ks;
  if (ks * std::sqrt(static_cast<double>(n)) > 2.0)
    result.fit.flags.push_back("poor_fit");
  return result;
}

}  // namespace qlab
