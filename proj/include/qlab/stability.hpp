#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qlab/errors.hpp"
#include "qlab/math.hpp"
#include "qlab/rician.hpp"
#include "qlab/types.hpp"

namespace qlab {

// ---------------------------------------------------------------------------
// Dropout detection: maximal runs of samples strictly below
// mean - multiplier * std, runs separated by at most one sample merged.
// ---------------------------------------------------------------------------

struct DropoutInterval {
  double t_start = 0.0;
  double t_end = 0.0;
};

struct DropoutReport {
  std::vector<DropoutInterval> intervals;
  double threshold = 0.0;
  double affected_fraction = 0.0;
};

inline DropoutReport detect_dropouts(const TimeTrace& trace, double mean_value,
                                     double std_value,
                                     double multiplier = 1.0) {
  validate(trace);
  if (trace.kind != ParameterKind::t1 && trace.kind != ParameterKind::t2_star)
    throw ValidationError("detect_dropouts: trace must be of T1 or T2* kind");
  DropoutReport report;
  report.threshold = mean_value - multiplier * std_value;

  std::vector<std::size_t> below;
  for (std::size_t i = 0; i < trace.values.size(); ++i)
    if (trace.values[i] < report.threshold) below.push_back(i);

  std::size_t covered = 0;
  std::size_t group_start = 0;
  for (std::size_t k = 0; k < below.size(); ++k) {
    const bool last = (k + 1 == below.size());
    // gap of one above-threshold sample still belongs to the same event
    if (last || below[k + 1] - below[k] > 2) {
      const std::size_t first_idx = below[group_start];
      const std::size_t last_idx = below[k];
      report.intervals.push_back(
          {trace.timestamps[first_idx], trace.timestamps[last_idx]});
      covered += last_idx - first_idx + 1;
      group_start = k + 1;
    }
  }
  report.affected_fraction =
      trace.values.empty()
          ? 0.0
          : static_cast<double>(covered) / static_cast<double>(trace.values.size());
  return report;
}

// ---------------------------------------------------------------------------
// Cross-parameter coincidence of dropout windows
// ---------------------------------------------------------------------------

struct CoincidencePair {
  std::string from;
  std::string to;
  double overlap = 0.0;  // fraction of `from` dropout samples inside `to` windows
  bool flagged = false;
};

struct CoincidenceReport {
  std::vector<CoincidencePair> pairs;
  double flag_threshold = 0.0;
};

namespace detail {

inline bool inside_any(double t, const std::vector<DropoutInterval>& intervals) {
  for (const auto& iv : intervals)
    if (t >= iv.t_start && t <= iv.t_end) return true;
  return false;
}

}  // namespace detail

// For each ordered pair, the fraction of one trace's dropout time that falls
// inside the other's dropout windows; membership is evaluated on the source
// trace's own timestamps (nearest-sample time base).
inline CoincidenceReport coincidence_report(
    const std::map<std::string, TimeTrace>& traces,
    const std::map<std::string, DropoutReport>& reports,
    double flag_threshold = 0.5) {
  CoincidenceReport out;
  out.flag_threshold = flag_threshold;
  for (const auto& [name_a, trace_a] : traces) {
    const auto rep_a = reports.find(name_a);
    if (rep_a == reports.end()) continue;
    for (const auto& [name_b, rep_b] : reports) {
      if (name_b == name_a) continue;
      long in_dropout = 0, coincident = 0;
      for (const double t : trace_a.timestamps) {
        if (!detail::inside_any(t, rep_a->second.intervals)) continue;
        ++in_dropout;
        if (detail::inside_any(t, rep_b.intervals)) ++coincident;
      }
      if (in_dropout == 0) continue;  // nothing to correlate
      CoincidencePair pair;
      pair.from = name_a;
      pair.to = name_b;
      pair.overlap =
          static_cast<double>(coincident) / static_cast<double>(in_dropout);
      pair.flagged = pair.overlap >= flag_threshold;
      out.pairs.push_back(pair);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Distribution summary: mirrored-Rician fit plus integration moments. The
// histogram pathway is the default, matching how the reference histograms are
// processed; sample skewness is reported alongside.
// ---------------------------------------------------------------------------

struct DistributionSummary {
  RicianParams params;
  FitResult fit;
  double mean = 0.0;
  double stddev = 0.0;
  double sample_skewness = 0.0;
  double ks_statistic = 0.0;
};

inline DistributionSummary distribution_summary(
    std::span<const double> samples,
    RicianFitMethod method = RicianFitMethod::histogram) {
  const auto rician = fit_rician_mirrored(samples, method);
  const auto moments = rician_moments(rician.params);
  DistributionSummary summary;
  summary.params = rician.params;
  summary.fit = rician.fit;
  summary.mean = moments.mean;
  summary.stddev = moments.stddev;
  summary.sample_skewness = skewness(samples);
  summary.ks_statistic = rician.ks_statistic;
  return summary;
}

// ---------------------------------------------------------------------------
// sigma_T1 vs <T1> benchmark fit
// ---------------------------------------------------------------------------

struct ScalingPoint {
  std::string label;
  double mean_t1_s = 0.0;
  double std_t1_s = 0.0;
  double std_t1_stderr_s = 0.0;  // 0 = unknown -> unweighted fit
  long n_samples = 0;
  double span_hours = 0.0;
};

// Admission per the benchmarking protocol: > 500 samples over >= 10 h.
inline bool admissible(const ScalingPoint& p) {
  return p.n_samples > 500 && p.span_hours >= 10.0;
}

struct ScalingLawFit {
  double a = 0.0;             // sigma = a * <T1>^{3/2}, (time)^{-1/2}
  double a_stderr = 0.0;
  double free_exponent = 0.0;  // diagnostic log-log slope
  double free_exponent_stderr = 0.0;
  double free_prefactor = 0.0;
  int n_admitted = 0;
  std::vector<std::string> rejected;
};

inline ScalingLawFit fit_scaling_law(const std::vector<ScalingPoint>& points,
                                     bool override_admission = false) {
  std::vector<const ScalingPoint*> admitted;
  ScalingLawFit fit;
  for (const auto& p : points) {
    if (override_admission || admissible(p))
      admitted.push_back(&p);
    else
      fit.rejected.push_back(p.label);
  }
  if (admitted.size() < 3)
    throw InsufficientDataError(
        "fit_scaling_law: need >= 3 admitted points, have " +
        std::to_string(admitted.size()));
  fit.n_admitted = static_cast<int>(admitted.size());

  bool weighted = true;
  for (const auto* p : admitted)
    if (!(p->std_t1_stderr_s > 0.0)) weighted = false;

  // exponent fixed at 3/2: linear in a
  double swx2 = 0.0, swxy = 0.0;
  for (const auto* p : admitted) {
    const double x = std::pow(p->mean_t1_s, 1.5);
    const double w = weighted ? 1.0 / (p->std_t1_stderr_s * p->std_t1_stderr_s)
                              : 1.0;
    swx2 += w * x * x;
    swxy += w * x * p->std_t1_s;
  }
  fit.a = swxy / swx2;
  if (weighted) {
    fit.a_stderr = std::sqrt(1.0 / swx2);
  } else {
    double ssr = 0.0;
    for (const auto* p : admitted) {
      const double r = p->std_t1_s - fit.a * std::pow(p->mean_t1_s, 1.5);
      ssr += r * r;
    }
    const double dof = static_cast<double>(admitted.size()) - 1.0;
    fit.a_stderr = dof > 0 ? std::sqrt(ssr / dof / swx2) : 0.0;
  }

  // free-exponent diagnostic
  std::vector<double> lx, ly;
  for (const auto* p : admitted) {
    if (p->mean_t1_s > 0 && p->std_t1_s > 0) {
      lx.push_back(std::log(p->mean_t1_s));
      ly.push_back(std::log(p->std_t1_s));
    }
  }
  if (lx.size() >= 3) {
    const auto line = linear_regression(lx, ly);
    fit.free_exponent = line.slope;
    fit.free_exponent_stderr = line.slope_stderr;
    fit.free_prefactor = std::exp(line.intercept);
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Qubit-frequency drift from a sequence of Ramsey fits
// ---------------------------------------------------------------------------

struct DriftSeries {
  TimeTrace trace;  // |f_ramsey| - detuning, Hz
  int dropped_count = 0;
  double max_abs_offset_hz = 0.0;
};

inline DriftSeries frequency_drift_series(const std::vector<double>& times_s,
                                          const std::vector<FitResult>& fits,
                                          double detuning_hz) {
  if (times_s.size() != fits.size())
    throw ValidationError("frequency_drift_series: times/fits length mismatch");
  DriftSeries series;
  series.trace.kind = ParameterKind::f_ramsey_offset;
  series.trace.unit = "hz";
  for (std::size_t k = 0; k < fits.size(); ++k) {
    const FitResult& fit = fits[k];
    if (!fit.converged || fit.has_flag("alias_suspect") ||
        fit.has_flag("unresolved_frequency")) {
      ++series.dropped_count;
      continue;
    }
    const double offset = std::fabs(fit.params.at("f_ramsey")) - detuning_hz;
    series.trace.timestamps.push_back(times_s[k]);
    series.trace.values.push_back(offset);
    series.max_abs_offset_hz =
        std::max(series.max_abs_offset_hz, std::fabs(offset));
  }
  return series;
}

}  // namespace qlab
