#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qlab/constants.hpp"
#include "qlab/errors.hpp"
#include "qlab/types.hpp"

namespace qlab {

// Quadratic discriminant analysis on the IQ plane: one Gaussian per prepared
// state, priors fixed to 1/2 (shot sets are balanced by protocol). The model
// is refit for every shot set.

struct Mat2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
  double trace() const { return xx + yy; }
};

struct GaussianClass {
  std::array<double, 2> mean{0.0, 0.0};
  Mat2 cov;
  double log_det = 0.0;
  Mat2 inv;
};

struct DiscriminationModel {
  GaussianClass cls[2];
  double prior = 0.5;
  bool regularized = false;
  double ridge_epsilon = 0.0;
};

namespace detail {

inline void finalize_class(GaussianClass& c, bool& regularized,
                           double& ridge_out) {
  // ridge keeps the rule defined on degenerate clouds
  const double eps_rel = 1e-6 * 0.5 * c.cov.trace();
  const double eps_abs =
      1e-12 * (1.0 + c.mean[0] * c.mean[0] + c.mean[1] * c.mean[1]);
  if (!(c.cov.det() > 0.0) || !(c.cov.xx > 0.0) || !(c.cov.yy > 0.0)) {
    const double eps = eps_rel > 0.0 ? eps_rel : eps_abs;
    c.cov.xx += eps;
    c.cov.yy += eps;
    regularized = true;
    ridge_out = eps;
    if (!(c.cov.det() > 0.0)) {
      c.cov.xx += eps_abs;
      c.cov.yy += eps_abs;
    }
  }
  const double d = c.cov.det();
  c.log_det = std::log(d);
  c.inv = {c.cov.yy / d, -c.cov.xy / d, c.cov.xx / d};
}

}  // namespace detail

inline DiscriminationModel fit_discriminator(const IqShotSet& set) {
  validate(set);
  long n[2] = {0, 0};
  double sum_i[2] = {0, 0}, sum_q[2] = {0, 0};
  for (const auto& s : set.shots) {
    ++n[s.prepared_state];
    sum_i[s.prepared_state] += s.i;
    sum_q[s.prepared_state] += s.q;
  }
  if (n[0] < 2 || n[1] < 2)
    throw ValidationError("fit_discriminator: need >= 2 shots per class");

  DiscriminationModel model;
  for (int c = 0; c < 2; ++c) {
    model.cls[c].mean = {sum_i[c] / n[c], sum_q[c] / n[c]};
  }
  double sxx[2] = {0, 0}, sxy[2] = {0, 0}, syy[2] = {0, 0};
  for (const auto& s : set.shots) {
    const int c = s.prepared_state;
    const double di = s.i - model.cls[c].mean[0];
    const double dq = s.q - model.cls[c].mean[1];
    sxx[c] += di * di;
    sxy[c] += di * dq;
    syy[c] += dq * dq;
  }
  for (int c = 0; c < 2; ++c) {
    const double denom = static_cast<double>(n[c] - 1);
    model.cls[c].cov = {sxx[c] / denom, sxy[c] / denom, syy[c] / denom};
    detail::finalize_class(model.cls[c], model.regularized,
                           model.ridge_epsilon);
  }
  return model;
}

// log discriminant score of class c at (i, q); priors cancel at 1/2
inline double qda_score(const DiscriminationModel& m, int c, double i,
                        double q) {
  const auto& g = m.cls[c];
  const double di = i - g.mean[0];
  const double dq = q - g.mean[1];
  const double maha =
      di * di * g.inv.xx + 2.0 * di * dq * g.inv.xy + dq * dq * g.inv.yy;
  return std::log(m.prior) - 0.5 * g.log_det - 0.5 * maha;
}

inline int classify(const DiscriminationModel& m, double i, double q) {
  return qda_score(m, 1, i, q) > qda_score(m, 0, i, q) ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct ReadoutMetrics {
  double delta_m = 0.0;
  double fidelity = 0.0;
  double confusion[2][2] = {{0, 0}, {0, 0}};  // confusion[i][j] = P(i|j)
  double t_eff_k = 0.0;
  std::vector<std::string> flags;
};

inline double fidelity_from_confusion(double p00, double p11) {
  return 0.5 * (p00 + p11);
}

// Boltzmann ratio inverted for the temperature; uses the full
// P(1|0)/P(0|0) ratio rather than the P(0|0) ~ 1 approximation.
inline double effective_temperature_k(double p10, double p00, double f_q_hz) {
  if (!(p10 > 0.0) || !(p00 > 0.0) || p10 >= p00)
    throw ValidationError("effective_temperature: need 0 < P(1|0) < P(0|0)");
  return -PhysicalConstants::h * f_q_hz /
         (PhysicalConstants::k_b * std::log(p10 / p00));
}

inline ReadoutMetrics compute_metrics(const IqShotSet& set,
                                      const DiscriminationModel& model,
                                      double f_q_hz) {
  validate(set);
  ReadoutMetrics metrics;
  const double dx = model.cls[1].mean[0] - model.cls[0].mean[0];
  const double dy = model.cls[1].mean[1] - model.cls[0].mean[1];
  metrics.delta_m = std::hypot(dx, dy);

  long counts[2][2] = {{0, 0}, {0, 0}};  // counts[classified][prepared]
  long totals[2] = {0, 0};
  for (const auto& s : set.shots) {
    ++counts[classify(model, s.i, s.q)][s.prepared_state];
    ++totals[s.prepared_state];
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      metrics.confusion[i][j] =
          static_cast<double>(counts[i][j]) / static_cast<double>(totals[j]);

  metrics.fidelity =
      fidelity_from_confusion(metrics.confusion[0][0], metrics.confusion[1][1]);

  const double p10 = metrics.confusion[1][0];
  const double p00 = metrics.confusion[0][0];
  if (p10 == 0.0) {
    // no excitations observed: report the 0 K floor marker
    metrics.t_eff_k = 0.0;
    metrics.flags.push_back("t_eff_floor_no_excitation");
  } else if (p10 >= p00) {
    metrics.t_eff_k = std::numeric_limits<double>::quiet_NaN();
    metrics.flags.push_back("t_eff_unphysical");
  } else {
    metrics.t_eff_k = effective_temperature_k(p10, p00, f_q_hz);
  }
  if (model.regularized) metrics.flags.push_back("covariance_regularized");
  return metrics;
}

}  // namespace qlab
