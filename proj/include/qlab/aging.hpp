#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qlab/constants.hpp"
#include "qlab/errors.hpp"
#include "qlab/types.hpp"

namespace qlab {

// Junction aging analysis. Everything is SI internally: energies in J,
// frequencies in Hz, resistance in Ohm.

struct JunctionState {
  double e_j = 0.0;
  double e_c = 0.0;
  double r_n = 0.0;
  double delta = 0.0;
};

inline void validate(const JunctionState& s) {
  if (!(s.e_j > 0.0) || !(s.e_c > 0.0) || !(s.r_n > 0.0) || !(s.delta > 0.0))
    throw ValidationError("JunctionState: all quantities must be positive");
}

struct ResonatorModel {
  double f_r_bare_hz = 0.0;
  double g_hz = 0.0;  // 0 -> back-solved from the reference cooldown
  double l_tot_m = 0.0;
  double eps_eff = 0.0;
};

// Transmon transition frequency; the asymptotic form is only trusted for
// E_J/E_C well above 1 and a warning is attached below 20.
inline double fq_from_junction(const JunctionState& s,
                               std::vector<std::string>* warnings = nullptr) {
  validate(s);
  if (warnings && s.e_j / s.e_c < 20.0)
    warnings->push_back("E_J/E_C below 20: transmon approximation degraded");
  return (std::sqrt(8.0 * s.e_j * s.e_c) - s.e_c) / PhysicalConstants::h;
}

// Normal-state junction resistance from the qubit frequency.
inline double rn_from_fq(double f_q_hz, double e_c_j, double delta_j) {
  if (!(f_q_hz > 0.0) || !(e_c_j > 0.0) || !(delta_j > 0.0))
    throw ValidationError("rn_from_fq: inputs must be positive");
  const double h = PhysicalConstants::h;
  const double e = PhysicalConstants::e;
  const double denom = f_q_hz * h + e_c_j;
  return h * delta_j * e_c_j / (e * e * denom * denom);
}

// Ambegaokar-Baratoff Josephson energy.
inline double ej_from_rn(double r_n_ohm, double delta_j) {
  if (!(r_n_ohm > 0.0) || !(delta_j > 0.0))
    throw ValidationError("ej_from_rn: inputs must be positive");
  const double e = PhysicalConstants::e;
  return PhysicalConstants::h * delta_j / (8.0 * e * e * r_n_ohm);
}

inline JunctionState junction_from_rn(double r_n_ohm, double e_c_j,
                                      double delta_j) {
  JunctionState s;
  s.r_n = r_n_ohm;
  s.e_c = e_c_j;
  s.delta = delta_j;
  s.e_j = ej_from_rn(r_n_ohm, delta_j);
  validate(s);
  return s;
}

// Dispersive pulling of the readout resonator.
inline double dressed_fr(const ResonatorModel& m, double f_q_hz,
                         std::vector<std::string>* warnings = nullptr) {
  if (!(m.f_r_bare_hz > 0.0))
    throw ValidationError("dressed_fr: f_r_bare must be positive");
  const double gap = m.f_r_bare_hz - f_q_hz;
  if (gap == 0.0) throw ValidationError("dressed_fr: f_r_bare equals f_q");
  if (warnings && std::fabs(gap) < 10.0 * m.g_hz)
    warnings->push_back("|f_r_bare - f_q| < 10 g: dispersive approximation degraded");
  return m.f_r_bare_hz + m.g_hz * m.g_hz / gap;
}

// Quarter-wave bare resonance.
inline double bare_fr(double l_tot_m, double eps_eff) {
  if (!(l_tot_m > 0.0) || !(eps_eff >= 1.0))
    throw ValidationError("bare_fr: need l_tot > 0 and eps_eff >= 1");
  return PhysicalConstants::c0 / (4.0 * l_tot_m * std::sqrt(eps_eff));
}

// ---------------------------------------------------------------------------
// Resonator-shift decomposition: the part of each cooldown's f_r change that
// dispersive pulling explains (f_r_bare held at its reference value, g
// rescaled by R_N^{-1/4} as the junction ages), the remainder attributed to
// the bare resonance. Shares sum to the observed shift by construction.
// ---------------------------------------------------------------------------

struct FrShiftShare {
  int cooldown_index = 0;
  double elapsed_days = 0.0;
  double observed_shift_hz = 0.0;
  double pulling_share_hz = 0.0;
  double bare_share_hz = 0.0;
};

struct FrShiftDecomposition {
  std::string method = "eq4_pulling_decomposition";
  double f_r_bare_hz = 0.0;
  double g_ref_hz = 0.0;
  std::vector<FrShiftShare> shares;
  std::vector<std::string> notes;
};

inline FrShiftDecomposition decompose_fr_shift(
    const std::vector<CooldownRecord>& records, const ResonatorModel& model,
    double e_c_j, double delta_j) {
  validate(records);
  FrShiftDecomposition out;

  double bare = model.f_r_bare_hz;
  if (!(bare > 0.0)) {
    if (model.l_tot_m > 0.0 && model.eps_eff >= 1.0)
      bare = bare_fr(model.l_tot_m, model.eps_eff);
    else
      throw ValidationError(
          "decompose_fr_shift: need f_r_bare or (l_tot, eps_eff)");
  }
  out.f_r_bare_hz = bare;

  // reference = earliest record carrying both frequencies
  const CooldownRecord* ref = nullptr;
  for (const auto& rec : records) {
    if (rec.f_q_hz && rec.f_r_hz) {
      ref = &rec;
      break;
    }
    out.notes.push_back("cooldown " + std::to_string(rec.cooldown_index) +
                        " skipped: missing f_q or f_r");
  }
  if (!ref)
    throw ValidationError("decompose_fr_shift: no record carries both f_q and f_r");
  if (ref->elapsed_days > 0.0)
    out.notes.push_back("baseline from cooldown " +
                        std::to_string(ref->cooldown_index) +
                        " (first cooldown unavailable)");

  double g_ref = model.g_hz;
  if (!(g_ref > 0.0)) {
    const double g2 = (*ref->f_r_hz - bare) * (bare - *ref->f_q_hz);
    if (!(g2 > 0.0))
      throw ValidationError(
          "decompose_fr_shift: reference cooldown incompatible with f_r_bare "
          "(cannot back-solve g)");
    g_ref = std::sqrt(g2);
  }
  out.g_ref_hz = g_ref;

  const double rn_ref = rn_from_fq(*ref->f_q_hz, e_c_j, delta_j);
  const double fr_pred_ref = bare + g_ref * g_ref / (bare - *ref->f_q_hz);

  int usable = 0;
  for (const auto& rec : records) {
    if (&rec == ref) {
      ++usable;
      continue;
    }
    if (!rec.f_q_hz || !rec.f_r_hz) {
      const auto note = "cooldown " + std::to_string(rec.cooldown_index) +
                        " skipped: missing f_q or f_r";
      bool already = false;
      for (const auto& n : out.notes) already = already || n == note;
      if (!already) out.notes.push_back(note);
      continue;
    }
    ++usable;
    if (rec.cooldown_index <= ref->cooldown_index) continue;
    const double rn_k = rn_from_fq(*rec.f_q_hz, e_c_j, delta_j);
    const double g_k = g_ref * std::pow(rn_ref / rn_k, 0.25);
    const double fr_pred_k = bare + g_k * g_k / (bare - *rec.f_q_hz);
    FrShiftShare share;
    share.cooldown_index = rec.cooldown_index;
    share.elapsed_days = rec.elapsed_days;
    share.observed_shift_hz = *rec.f_r_hz - *ref->f_r_hz;
    share.pulling_share_hz = fr_pred_k - fr_pred_ref;
    share.bare_share_hz = share.observed_shift_hz - share.pulling_share_hz;
    out.shares.push_back(share);
  }
  if (usable < 2)
    throw InsufficientDataError(
        "decompose_fr_shift: need >= 2 records with both frequencies");
  return out;
}

// ---------------------------------------------------------------------------
// Aging summary across cooldowns for one qubit: frequency shifts and
// estimated junction-resistance change relative to the first available
// cooldown. Mean T1 is included as a reported observation.
// ---------------------------------------------------------------------------

struct CooldownEntry {
  int cooldown_index = 0;
  double elapsed_days = 0.0;
  std::optional<double> delta_f_q_hz;
  std::optional<double> delta_f_r_hz;
  std::optional<double> delta_rn_over_rn;
  std::optional<double> mean_t1_s;
};

struct CooldownReportData {
  std::string label;
  std::vector<CooldownEntry> entries;
  std::vector<std::string> notes;
};

inline CooldownReportData cooldown_report(const std::string& label,
                                          const std::vector<CooldownRecord>& records,
                                          double e_c_j, double delta_j) {
  validate(records);
  CooldownReportData report;
  report.label = label;

  const CooldownRecord* base_q = nullptr;
  const CooldownRecord* base_r = nullptr;
  for (const auto& rec : records) {
    if (!base_q && rec.f_q_hz) base_q = &rec;
    if (!base_r && rec.f_r_hz) base_r = &rec;
  }
  if (base_q && base_q->elapsed_days > 0.0)
    report.notes.push_back("f_q baseline from cooldown " +
                           std::to_string(base_q->cooldown_index) +
                           " (first cooldown unavailable)");
  if (base_r && base_r->elapsed_days > 0.0)
    report.notes.push_back("f_r baseline from cooldown " +
                           std::to_string(base_r->cooldown_index) +
                           " (first cooldown unavailable)");

  const double rn_base =
      base_q ? rn_from_fq(*base_q->f_q_hz, e_c_j, delta_j) : 0.0;
  for (const auto& rec : records) {
    CooldownEntry entry;
    entry.cooldown_index = rec.cooldown_index;
    entry.elapsed_days = rec.elapsed_days;
    if (rec.f_q_hz && base_q) {
      entry.delta_f_q_hz = *rec.f_q_hz - *base_q->f_q_hz;
      entry.delta_rn_over_rn =
          rn_from_fq(*rec.f_q_hz, e_c_j, delta_j) / rn_base - 1.0;
    }
    if (rec.f_r_hz && base_r) entry.delta_f_r_hz = *rec.f_r_hz - *base_r->f_r_hz;
    entry.mean_t1_s = rec.mean_t1_s;
    report.entries.push_back(entry);
  }
  report.notes.push_back(
      "mean T1 per cooldown is reported as observed; no trend asserted");
  return report;
}

}  // namespace qlab
