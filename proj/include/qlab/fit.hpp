#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qlab/errors.hpp"
#include "qlab/levmar.hpp"
#include "qlab/math.hpp"
#include "qlab/types.hpp"

namespace qlab {

// ---------------------------------------------------------------------------
// Model functions. Parameter vectors are ordered as documented on each eval;
// jacobians are analytic and checked against finite differences in the tests.
// ---------------------------------------------------------------------------

// p = {A, B, T1}; value = A exp(-tau/T1) + B
inline double exponential_model(const std::vector<double>& p, double tau,
                                double* grad = nullptr) {
  const double decay = std::exp(-tau / p[2]);
  if (grad) {
    grad[0] = decay;
    grad[1] = 1.0;
    grad[2] = p[0] * tau / (p[2] * p[2]) * decay;
  }
  return p[0] * decay + p[1];
}

// p = {A, B, phi0, f, T2}; value = A cos(2 pi f tau + phi0) exp(-tau/T2) + B
inline double damped_cosine_model(const std::vector<double>& p, double tau,
                                  double* grad = nullptr) {
  const double theta = 2.0 * kPi * p[3] * tau + p[2];
  const double decay = std::exp(-tau / p[4]);
  const double c = std::cos(theta), s = std::sin(theta);
  if (grad) {
    grad[0] = c * decay;
    grad[1] = 1.0;
    grad[2] = -p[0] * s * decay;
    grad[3] = -p[0] * s * 2.0 * kPi * tau * decay;
    grad[4] = p[0] * c * tau / (p[4] * p[4]) * decay;
  }
  return p[0] * c * decay + p[1];
}

namespace detail {

inline LmModel curve_lm_model(double (*model)(const std::vector<double>&,
                                              double, double*),
                              const std::vector<double>& xs,
                              const std::vector<double>& ys,
                              std::size_t n_params) {
  return [model, &xs, &ys, n_params](const std::vector<double>& p,
                                     std::vector<double>& r,
                                     std::vector<double>* jac) {
    for (std::size_t k = 0; k < xs.size(); ++k) {
      double* grad = jac ? &(*jac)[k * n_params] : nullptr;
      r[k] = model(p, xs[k], grad) - ys[k];
    }
  };
}

inline FitResult pack_fit(const LmResult& lm,
                          const std::vector<std::string>& names) {
  FitResult out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.params[names[i]] = lm.params[i];
    out.stderrs[names[i]] = lm.stderrs[i];
  }
  out.residual_norm = lm.residual_norm;
  out.converged = lm.converged;
  if (!lm.converged) out.flags.push_back("not_converged");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exponential decay fit
// ---------------------------------------------------------------------------

inline FitResult fit_exponential(const DecayCurve& curve) {
  validate(curve);
  const auto& xs = curve.delays_s;
  const auto& ys = curve.populations;
  if (xs.size() < 4)
    throw InsufficientDataError("fit_exponential: need >= 4 points");

  const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
  const double spread = *hi - *lo;
  if (spread < 1e-12 * std::max(1.0, std::fabs(*hi)))
    throw DegenerateDataError(
        "fit_exponential: flat curve, amplitude indistinguishable from 0");

  // initial guess: B from the tail, A from the first point, T1 from a
  // log-linear regression of P1 - B
  const std::size_t tail = std::max<std::size_t>(2, xs.size() / 10);
  double b0 = 0.0;
  for (std::size_t i = xs.size() - tail; i < xs.size(); ++i) b0 += ys[i];
  b0 /= static_cast<double>(tail);
  double a0 = ys.front() - b0;
  if (a0 == 0.0) a0 = spread;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = (ys[i] - b0) / a0;  // normalize sign
    if (v > 1e-6) {
      lx.push_back(xs[i]);
      ly.push_back(std::log(v));
    }
  }
  double t1_0 = xs.back() > 0 ? xs.back() / 3.0 : 1.0;
  if (lx.size() >= 2) {
    try {
      const auto line = linear_regression(lx, ly);
      if (line.slope < 0) t1_0 = -1.0 / line.slope;
    } catch (const Error&) {
    }
  }

  const auto lm = levenberg_marquardt(
      detail::curve_lm_model(&exponential_model, xs, ys, 3), {a0, b0, t1_0},
      xs.size());
  FitResult out = detail::pack_fit(lm, {"amplitude", "offset", "t1"});
  if (out.params["t1"] <= 0.0) {
    out.converged = false;
    out.flags.push_back("nonpositive_t1");
  }
  const double a_hat = out.params["amplitude"];
  if (std::fabs(a_hat) < out.stderrs["amplitude"])
    out.flags.push_back("amplitude_consistent_with_zero");
  return out;
}

// ---------------------------------------------------------------------------
// Ramsey fringe fit
// ---------------------------------------------------------------------------

namespace detail {

// |sum (y - mean) e^{-2 pi i f t}| on a frequency comb; handles the mildly
// non-uniform grids that come out of file ingestion.
struct SpectralPeak {
  double frequency;
  bool at_nyquist_edge;
};

inline SpectralPeak spectral_peak(const std::vector<double>& ts,
                                  const std::vector<double>& ys,
                                  double nyquist) {
  const std::size_t n = ts.size();
  double ymean = 0.0;
  for (double y : ys) ymean += y;
  ymean /= static_cast<double>(n);
  const std::size_t n_freq = std::max<std::size_t>(8, n);
  double best_f = 0.0, best_p = -1.0;
  std::size_t best_k = 1;
  for (std::size_t k = 1; k <= n_freq; ++k) {
    const double f = nyquist * static_cast<double>(k) / n_freq;
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * kPi * f * ts[j];
      acc += (ys[j] - ymean) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    const double power = std::norm(acc);
    if (power > best_p) {
      best_p = power;
      best_f = f;
      best_k = k;
    }
  }
  return {best_f, best_k >= n_freq};
}

}  // namespace detail

inline FitResult fit_damped_cosine(const RamseyCurve& curve) {
  validate(curve);
  const auto& xs = curve.delays_s;
  const auto& ys = curve.populations;
  if (xs.size() < 8)
    throw InsufficientDataError("fit_damped_cosine: need >= 8 points");

  // sampling rate from the median spacing
  std::vector<double> gaps(xs.size() - 1);
  for (std::size_t i = 1; i < xs.size(); ++i) gaps[i - 1] = xs[i] - xs[i - 1];
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double dt = gaps[gaps.size() / 2];
  const double nyquist = 0.5 / dt;

  const auto peak = detail::spectral_peak(xs, ys, nyquist);
  const double f0 = std::max(peak.frequency, 0.25 / curve.t_max_s);

  // envelope from the demodulated analytic signal, block-averaged over one
  // oscillation period
  double b0 = 0.0;
  for (double y : ys) b0 += y;
  b0 /= static_cast<double>(ys.size());
  std::vector<std::complex<double>> demod(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double ang = 2.0 * kPi * f0 * xs[j];
    demod[j] = (ys[j] - b0) *
               std::complex<double>(std::cos(ang), std::sin(ang));
  }
  const std::size_t block =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(1.0 / (f0 * dt))),
                              1, xs.size() / 2);
  std::vector<double> env_t, env_log;
  std::complex<double> first_block{0.0, 0.0};
  for (std::size_t start = 0; start + block <= xs.size(); start += block) {
    std::complex<double> acc{0.0, 0.0};
    double tmid = 0.0;
    for (std::size_t j = start; j < start + block; ++j) {
      acc += demod[j];
      tmid += xs[j];
    }
    acc /= static_cast<double>(block);
    tmid /= static_cast<double>(block);
    if (start == 0) first_block = acc;
    if (std::abs(acc) > 1e-12) {
      env_t.push_back(tmid);
      env_log.push_back(std::log(std::abs(acc)));
    }
  }
  double t2_0 = curve.t_max_s / 3.0;
  if (env_t.size() >= 2) {
    try {
      const auto line = linear_regression(env_t, env_log);
      if (line.slope < 0 && -1.0 / line.slope < 100.0 * curve.t_max_s)
        t2_0 = -1.0 / line.slope;
    } catch (const Error&) {
    }
  }
  double a0 = 2.0 * std::abs(first_block);
  if (a0 < 1e-9) a0 = 0.5;
  double phi0 = std::arg(first_block);

  const auto lm = levenberg_marquardt(
      detail::curve_lm_model(&damped_cosine_model, xs, ys, 5),
      {a0, b0, phi0, f0, t2_0}, xs.size());
  FitResult out =
      detail::pack_fit(lm, {"amplitude", "offset", "phi0", "f_ramsey", "t2_star"});

  // canonical form: f >= 0 (cosine is even), phi0 in (-pi, pi]
  double f_hat = out.params["f_ramsey"];
  double phi_hat = out.params["phi0"];
  if (f_hat < 0) {
    f_hat = -f_hat;
    phi_hat = -phi_hat;
  }
  phi_hat = std::remainder(phi_hat, 2.0 * kPi);
  out.params["f_ramsey"] = f_hat;
  out.params["phi0"] = phi_hat;
  out.params["nyquist_hz"] = nyquist;
  out.stderrs["nyquist_hz"] = 0.0;

  if (out.params["t2_star"] <= 0.0) {
    out.converged = false;
    out.flags.push_back("nonpositive_t2");
  }
  if (f_hat < 1.0 / curve.t_max_s) out.flags.push_back("unresolved_frequency");
  if (f_hat > nyquist + 1e-9 || peak.at_nyquist_edge)
    out.flags.push_back("nyquist_edge");
  // Sign resolution (drive calibration algebra) holds only while the fringe
  // stays within (0, 2 detuning); outside that window the value may be an
  // alias of a faster fringe.
  if (curve.set_detuning_hz > 0.0 &&
      std::fabs(f_hat - curve.set_detuning_hz) >= curve.set_detuning_hz)
    out.flags.push_back("alias_suspect");
  else if (peak.at_nyquist_edge)
    out.flags.push_back("alias_suspect");
  return out;
}

// ---------------------------------------------------------------------------
// Drive-frequency calibration from a detuned Ramsey fringe. Caller must
// ensure detuning > |f_drive_initial - f_qubit|; under that assumption the
// corrected drive lands on the qubit frequency.
// ---------------------------------------------------------------------------

inline double resolve_drive_calibration(double f_drive_initial_hz,
                                        double f_ramsey_hz,
                                        double detuning_hz) {
  return f_drive_initial_hz - (f_ramsey_hz - detuning_hz);
}

}  // namespace qlab
