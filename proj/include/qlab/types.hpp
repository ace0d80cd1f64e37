#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qlab/constants.hpp"
#include "qlab/errors.hpp"

namespace qlab {

// All types below are immutable value objects by convention: construct,
// validate, share freely across workers.

enum class ParameterKind {
  t1,
  t2_star,
  f_ramsey_offset,
  delta_m,
  fidelity,
  t_eff,
  t_mxc,
};

inline const char* to_string(ParameterKind k) {
  switch (k) {
    case ParameterKind::t1: return "T1";
    case ParameterKind::t2_star: return "T2*";
    case ParameterKind::f_ramsey_offset: return "f_ramsey_offset";
    case ParameterKind::delta_m: return "delta_m";
    case ParameterKind::fidelity: return "fidelity";
    case ParameterKind::t_eff: return "t_eff";
    case ParameterKind::t_mxc: return "t_mxc";
  }
  return "?";
}

inline ParameterKind parameter_kind_from_string(const std::string& s) {
  if (s == "T1") return ParameterKind::t1;
  if (s == "T2*") return ParameterKind::t2_star;
  if (s == "f_ramsey_offset") return ParameterKind::f_ramsey_offset;
  if (s == "delta_m") return ParameterKind::delta_m;
  if (s == "fidelity") return ParameterKind::fidelity;
  if (s == "t_eff") return ParameterKind::t_eff;
  if (s == "t_mxc") return ParameterKind::t_mxc;
  throw ValidationError("unknown parameter_kind '" + s +
                        "' (expected one of T1, T2*, f_ramsey_offset, "
                        "delta_m, fidelity, t_eff, t_mxc)");
}

// Static design parameters of one qubit (frequencies in Hz, gap in J).
struct QubitDesign {
  std::string chip_id;
  std::string qubit_id;
  double f_r_hz = 0.0;
  double f_q_hz = 0.0;
  double anharmonicity_hz = 0.0;
  double gap_delta_j = 0.0;

  // Transmon approximation: anharmonicity magnitude ~ E_C / h.
  double charging_energy_j() const {
    return PhysicalConstants::h * anharmonicity_hz;
  }
};

inline void validate(const QubitDesign& q) {
  if (!(q.f_q_hz > 0.0))
    throw ValidationError("QubitDesign: rule f_q > 0 violated");
  if (!(q.f_r_hz > q.f_q_hz))
    throw ValidationError("QubitDesign: rule f_r > f_q violated");
  if (!(q.anharmonicity_hz > 0.0))
    throw ValidationError("QubitDesign: rule anharmonicity > 0 violated");
  if (!(q.gap_delta_j > 0.0))
    throw ValidationError("QubitDesign: rule gap_delta > 0 violated");
}

// Time series of one monitored parameter; timestamps are wall-clock seconds
// since trace start, values are SI.
struct TimeTrace {
  ParameterKind kind = ParameterKind::t1;
  std::string unit;  // SI unit of `values` ("s", "hz", "k", "1")
  std::vector<double> timestamps;
  std::vector<double> values;
};

inline void validate(const TimeTrace& t) {
  if (t.timestamps.size() != t.values.size())
    throw ValidationError("TimeTrace: timestamps/values length mismatch");
  if (t.timestamps.empty())
    throw ValidationError("TimeTrace: rule length >= 1 violated");
  for (std::size_t i = 0; i < t.timestamps.size(); ++i) {
    if (!std::isfinite(t.values[i]))
      throw ValidationError("TimeTrace: non-finite value at row " +
                            std::to_string(i + 1));
    if (i > 0 && !(t.timestamps[i] > t.timestamps[i - 1]))
      throw ValidationError(
          "TimeTrace: rule timestamps strictly increasing violated at row " +
          std::to_string(i + 1));
  }
  if (t.unit.empty()) throw ValidationError("TimeTrace: missing unit");
}

// Relaxation measurement: excited-state population vs delay.
struct DecayCurve {
  std::vector<double> delays_s;
  std::vector<double> populations;
  long shots_per_point = 0;  // 0 = unknown (ingested file without metadata)
};

inline void validate(const DecayCurve& c) {
  if (c.delays_s.size() != c.populations.size())
    throw ValidationError("DecayCurve: delays/populations length mismatch");
  for (std::size_t i = 0; i < c.delays_s.size(); ++i) {
    if (c.delays_s[i] < 0.0)
      throw ValidationError("DecayCurve: rule delays nonnegative violated at row " +
                            std::to_string(i + 1));
    if (i > 0 && !(c.delays_s[i] > c.delays_s[i - 1]))
      throw ValidationError(
          "DecayCurve: rule delays strictly increasing violated at row " +
          std::to_string(i + 1));
    if (!(c.populations[i] >= 0.0 && c.populations[i] <= 1.0))
      throw ValidationError("DecayCurve: rule p1 in [0,1] violated at row " +
                            std::to_string(i + 1));
  }
}

// Ramsey fringe with its virtual-Z set detuning.
struct RamseyCurve {
  std::vector<double> delays_s;
  std::vector<double> populations;
  double set_detuning_hz = 0.0;
  double t_max_s = 0.0;
  long shots_per_point = 0;
};

inline void validate(const RamseyCurve& c) {
  if (c.delays_s.size() != c.populations.size())
    throw ValidationError("RamseyCurve: delays/populations length mismatch");
  if (!(c.set_detuning_hz >= 0.0))
    throw ValidationError("RamseyCurve: rule detuning >= 0 violated");
  if (!(c.t_max_s > 0.0))
    throw ValidationError("RamseyCurve: rule t_max > 0 violated");
  for (std::size_t i = 0; i < c.delays_s.size(); ++i) {
    if (!(c.delays_s[i] >= 0.0 && c.delays_s[i] <= c.t_max_s))
      throw ValidationError(
          "RamseyCurve: rule delays within [0, t_max] violated at row " +
          std::to_string(i + 1));
    if (i > 0 && !(c.delays_s[i] > c.delays_s[i - 1]))
      throw ValidationError(
          "RamseyCurve: rule delays strictly increasing violated at row " +
          std::to_string(i + 1));
    if (!(c.populations[i] >= 0.0 && c.populations[i] <= 1.0))
      throw ValidationError("RamseyCurve: rule p1 in [0,1] violated at row " +
                            std::to_string(i + 1));
  }
}

struct IqShot {
  double i = 0.0;
  double q = 0.0;
  int prepared_state = 0;
};

// Single-shot readout record, both prepared states interleaved or blocked.
struct IqShotSet {
  std::vector<IqShot> shots;
  long n_per_state = 0;  // set when balanced, 0 for unbalanced ingests
};

inline void validate(const IqShotSet& s) {
  long n0 = 0, n1 = 0;
  for (std::size_t k = 0; k < s.shots.size(); ++k) {
    const IqShot& shot = s.shots[k];
    if (!std::isfinite(shot.i) || !std::isfinite(shot.q))
      throw ValidationError("IqShotSet: non-finite coordinate at row " +
                            std::to_string(k + 1));
    if (shot.prepared_state == 0)
      ++n0;
    else if (shot.prepared_state == 1)
      ++n1;
    else
      throw ValidationError("IqShotSet: prepared_state must be 0 or 1 at row " +
                            std::to_string(k + 1));
  }
  if (n0 == 0 || n1 == 0)
    throw ValidationError("IqShotSet: rule both prepared states present violated");
}

// Generic fit output. When converged is false, params hold the best-effort
// iterate and must be treated as unreliable (the "not_converged" flag is set).
struct FitResult {
  std::map<std::string, double> params;
  std::map<std::string, double> stderrs;
  double residual_norm = 0.0;
  bool converged = false;
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const {
    for (const auto& g : flags)
      if (g == f) return true;
    return false;
  }
};

inline void validate(const FitResult& f) {
  for (const auto& [name, se] : f.stderrs)
    if (se < 0.0)
      throw ValidationError("FitResult: rule stderr >= 0 violated for " + name);
}

// One cooldown cycle of the long-term study. Frequencies/T1 are optional:
// some qubits miss the first cooldown entirely.
struct CooldownRecord {
  int cooldown_index = 0;
  double elapsed_days = 0.0;
  std::optional<double> f_q_hz;
  std::optional<double> f_r_hz;
  std::optional<double> mean_t1_s;
};

inline void validate(const std::vector<CooldownRecord>& series) {
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].cooldown_index <= series[i - 1].cooldown_index)
      throw ValidationError("CooldownRecord: rule index strictly increasing violated at entry " +
                            std::to_string(i + 1));
    if (series[i].elapsed_days < series[i - 1].elapsed_days)
      throw ValidationError(
          "CooldownRecord: rule elapsed_days nondecreasing violated at entry " +
          std::to_string(i + 1));
  }
}

// Diagnostic only: pure-dephasing time from 1/T2 = 1/(2 T1) + 1/T_phi.
// Requires t2 < 2 t1; at the limit the dephasing contribution vanishes.
inline double pure_dephasing_time_s(double t1_s, double t2_s) {
  if (!(t1_s > 0.0) || !(t2_s > 0.0))
    throw ValidationError("pure_dephasing_time: times must be positive");
  const double inv = 1.0 / t2_s - 0.5 / t1_s;
  if (inv <= 0.0)
    throw ValidationError("pure_dephasing_time: requires T2 < 2 T1");
  return 1.0 / inv;
}

}  // namespace qlab
