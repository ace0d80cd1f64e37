#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "qlab/math.hpp"

namespace qlab {

// Levenberg-Marquardt with analytic Jacobians. Contract: at most 200
// iterations; converged when the relative step drops below 1e-10 or the
// relative objective change below 1e-12.
struct LmOptions {
  int max_iterations = 200;
  double step_tol = 1e-10;
  double objective_tol = 1e-12;
  double lambda_init = 1e-3;
};

struct LmResult {
  std::vector<double> params;
  std::vector<double> stderrs;       // sqrt(diag cov), zero when m <= n
  std::vector<double> covariance;    // n x n row-major
  double residual_norm = 0.0;        // ||r||_2 at the optimum
  bool converged = false;
  int iterations = 0;
};

// Model callback: fills residuals r (size m) and, when jac != nullptr, the
// row-major m x n Jacobian of the residuals.
using LmModel =
    std::function<void(const std::vector<double>& p, std::vector<double>& r,
                       std::vector<double>* jac)>;

inline LmResult levenberg_marquardt(const LmModel& model,
                                    std::vector<double> p, std::size_t m,
                                    const LmOptions& opt = {}) {
  const std::size_t n = p.size();
  std::vector<double> r(m), jac(m * n);
  std::vector<double> jtj(n * n), jtr(n), step(n), trial(n), r_trial(m);

  auto sum_sq = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
  };

  model(p, r, &jac);
  double cost = sum_sq(r);
  double lambda = opt.lambda_init;

  LmResult result;
  int iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    // normal equations
    for (std::size_t a = 0; a < n; ++a) {
      jtr[a] = 0.0;
      for (std::size_t b = 0; b <= a; ++b) jtj[a * n + b] = 0.0;
    }
    for (std::size_t k = 0; k < m; ++k) {
      const double* row = &jac[k * n];
      for (std::size_t a = 0; a < n; ++a) {
        jtr[a] += row[a] * r[k];
        for (std::size_t b = 0; b <= a; ++b) jtj[a * n + b] += row[a] * row[b];
      }
    }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) jtj[a * n + b] = jtj[b * n + a];

    double p_norm = 0.0;
    for (std::size_t a = 0; a < n; ++a) p_norm += p[a] * p[a];

    bool accepted = false;
    bool done = false;
    double new_cost = cost;
    for (int attempt = 0; attempt < 40 && !done; ++attempt) {
      std::vector<double> damped = jtj;
      for (std::size_t a = 0; a < n; ++a) {
        const double d = jtj[a * n + a];
        damped[a * n + a] = d + lambda * (d > 0 ? d : 1.0);
      }
      std::vector<double> rhs(n);
      for (std::size_t a = 0; a < n; ++a) rhs[a] = -jtr[a];
      try {
        step = solve_dense(damped, rhs);
      } catch (const Error&) {
        lambda *= 10.0;
        continue;
      }
      double step_norm = 0.0;
      for (std::size_t a = 0; a < n; ++a) step_norm += step[a] * step[a];
      const double rel_step =
          std::sqrt(step_norm) / (std::sqrt(p_norm) + 1e-300);
      if (rel_step < opt.step_tol) {
        // already at a stationary point
        result.converged = true;
        done = true;
        break;
      }
      for (std::size_t a = 0; a < n; ++a) trial[a] = p[a] + step[a];
      model(trial, r_trial, nullptr);
      new_cost = sum_sq(r_trial);
      if (std::isfinite(new_cost) && new_cost < cost) {
        accepted = true;
        lambda = std::max(lambda / 3.0, 1e-14);
        const double rel_obj = (cost - new_cost) / (cost + 1e-300);
        p = trial;
        model(p, r, &jac);
        cost = new_cost;
        if (rel_step < opt.step_tol || rel_obj < opt.objective_tol) {
          result.converged = true;
          done = true;
        }
        break;
      }
      if (std::isfinite(new_cost) &&
          std::fabs(new_cost - cost) <= opt.objective_tol * (cost + 1e-300)) {
        // no measurable objective change left in this direction
        result.converged = true;
        done = true;
        break;
      }
      lambda *= 4.0;
    }
    if (done || !accepted) {
      if (accepted || done) ++iter;
      break;
    }
  }

  result.params = p;
  result.iterations = iter;
  result.residual_norm = std::sqrt(cost);
  result.stderrs.assign(n, 0.0);
  result.covariance.assign(n * n, 0.0);
  if (m > n) {
    // covariance = s^2 (J^T J)^-1 at the optimum
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += jac[k * n + a] * jac[k * n + b];
        jtj[a * n + b] = s;
      }
    try {
      const auto inv = invert_dense(jtj, n);
      const double s2 = cost / static_cast<double>(m - n);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b)
          result.covariance[a * n + b] = s2 * inv[a * n + b];
        const double d = result.covariance[a * n + a];
        result.stderrs[a] = d > 0 ? std::sqrt(d) : 0.0;
      }
    } catch (const Error&) {
      // singular information matrix: leave stderrs at zero
    }
  }
  return result;
}

}  // namespace qlab
