#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "qlab/errors.hpp"
#include "qlab/math.hpp"
#include "qlab/rng.hpp"
#include "qlab/types.hpp"

namespace qlab {

// Synthetic raw-experiment generator. Everything here is a pure function of
// (parameters, seed); shot noise is binomial at the population level so the
// sampled P1 stays in [0, 1] by construction.

struct ExperimentNoiseConfig {
  long shots_per_point = 1 << 10;
  double iq_blob_sigma = 1.0;
  double thermal_excitation_p = 0.0;
  double decay_during_readout_p = 0.0;
  bool mist_mode = false;
  double mist_fraction = 0.0;
  double mist_spread_scale = 0.0;
  bool ideal = false;  // bypass sampling noise entirely

  static ExperimentNoiseConfig curve_defaults() { return {}; }
  static ExperimentNoiseConfig single_shot_defaults() {
    ExperimentNoiseConfig c;
    c.shots_per_point = 1 << 12;
    return c;
  }
};

inline void validate(const ExperimentNoiseConfig& c) {
  if (c.shots_per_point < 1)
    throw ValidationError("ExperimentNoiseConfig: rule shots >= 1 violated");
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError(std::string("ExperimentNoiseConfig: rule ") + name +
                            " in [0,1] violated");
  };
  prob(c.thermal_excitation_p, "thermal_excitation_p");
  prob(c.decay_during_readout_p, "decay_during_readout_p");
  prob(c.mist_fraction, "mist_fraction");
  if (c.iq_blob_sigma < 0.0)
    throw ValidationError("ExperimentNoiseConfig: iq_blob_sigma must be >= 0");
  if (c.mist_spread_scale < 0.0)
    throw ValidationError("ExperimentNoiseConfig: mist_spread_scale must be >= 0");
}

// ---------------------------------------------------------------------------
// Delay grids
// ---------------------------------------------------------------------------

// 40 points over [0, 5 T1]: zero plus a log-spaced ladder covering two
// decades up to the span.
inline std::vector<double> default_decay_grid(double t1_s, int n_points = 40) {
  if (!(t1_s > 0.0)) throw ValidationError("default_decay_grid: t1 must be > 0");
  if (n_points < 2) throw ValidationError("default_decay_grid: need >= 2 points");
  std::vector<double> grid;
  grid.reserve(n_points);
  grid.push_back(0.0);
  const double span = 5.0 * t1_s;
  const double lo = span / 100.0;
  for (int k = 0; k < n_points - 1; ++k)
    grid.push_back(lo * std::pow(span / lo,
                                 static_cast<double>(k) /
                                     static_cast<double>(n_points - 2)));
  return grid;
}

// Linear grid sampled at twice the requested Nyquist frequency.
inline std::vector<double> default_ramsey_grid(double t_max_s,
                                               double f_nyquist_hz) {
  if (!(t_max_s > 0.0) || !(f_nyquist_hz > 0.0))
    throw ValidationError("default_ramsey_grid: need positive t_max and f_nyquist");
  const double dt = 1.0 / (2.0 * f_nyquist_hz);
  std::vector<double> grid;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t > t_max_s * (1.0 + 1e-9)) break;
    grid.push_back(std::min(t, t_max_s));
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Decay curves
// ---------------------------------------------------------------------------

inline DecayCurve simulate_decay_curve(double t1_s,
                                       const std::vector<double>& delays_s,
                                       const ExperimentNoiseConfig& noise,
                                       std::uint64_t seed,
                                       double amplitude = 1.0,
                                       double offset = 0.0) {
  if (!(t1_s > 0.0)) throw ValidationError("simulate_decay_curve: t1 must be > 0");
  validate(noise);
  Philox rng(seed);
  DecayCurve curve;
  curve.delays_s = delays_s;
  curve.shots_per_point = noise.ideal ? 0 : noise.shots_per_point;
  curve.populations.reserve(delays_s.size());
  for (const double tau : delays_s) {
    const double p = amplitude * std::exp(-tau / t1_s) + offset;
    if (noise.ideal) {
      curve.populations.push_back(p);
    } else {
      const double clipped = std::clamp(p, 0.0, 1.0);
      curve.populations.push_back(
          static_cast<double>(rng.binomial(noise.shots_per_point, clipped)) /
          static_cast<double>(noise.shots_per_point));
    }
  }
  validate(curve);
  return curve;
}

// ---------------------------------------------------------------------------
// Ramsey fringes with virtual-Z detuning
// ---------------------------------------------------------------------------

// Software phase on the second pulse: 2 pi detuning tau, wrapped to [0, 2 pi).
inline double virtual_z_phase(double detuning_hz, double tau_s) {
  const double phi = std::fmod(2.0 * kPi * detuning_hz * tau_s, 2.0 * kPi);
  return phi < 0.0 ? phi + 2.0 * kPi : phi;
}

// qubit_offset_hz is f_q - f_drive. The fringe runs at |detuning - offset|,
// so the fitted fringe minus the set detuning recovers -offset and the drive
// calibration identity returns f_q exactly.
inline RamseyCurve simulate_ramsey_curve(double qubit_offset_hz, double t2_star_s,
                                         double detuning_hz, double t_max_s,
                                         const ExperimentNoiseConfig& noise,
                                         std::uint64_t seed,
                                         const std::vector<double>* delays = nullptr,
                                         double amplitude = 0.5,
                                         double offset = 0.5,
                                         double phi0 = 0.0) {
  if (!(t2_star_s > 0.0))
    throw ValidationError("simulate_ramsey_curve: t2_star must be > 0");
  if (detuning_hz < 0.0)
    throw ValidationError("simulate_ramsey_curve: detuning must be >= 0");
  validate(noise);
  Philox rng(seed);
  RamseyCurve curve;
  curve.set_detuning_hz = detuning_hz;
  curve.t_max_s = t_max_s;
  curve.shots_per_point = noise.ideal ? 0 : noise.shots_per_point;
  const std::vector<double> grid =
      delays ? *delays : default_ramsey_grid(t_max_s, 8.0 / t2_star_s);
  curve.delays_s = grid;
  for (const double tau : grid) {
    // precession in the drive frame plus the virtual-Z phase
    const double phase = virtual_z_phase(detuning_hz, tau) -
                         2.0 * kPi * qubit_offset_hz * tau + phi0;
    const double p =
        amplitude * std::cos(phase) * std::exp(-tau / t2_star_s) + offset;
    if (noise.ideal) {
      curve.populations.push_back(p);
    } else {
      const double clipped = std::clamp(p, 0.0, 1.0);
      curve.populations.push_back(
          static_cast<double>(rng.binomial(noise.shots_per_point, clipped)) /
          static_cast<double>(noise.shots_per_point));
    }
  }
  validate(curve);
  return curve;
}

// ---------------------------------------------------------------------------
// Single-shot IQ sets
// ---------------------------------------------------------------------------

// Ground blob at the origin, excited blob at (separation, 0). Thermal
// excitation relocates prepared-|0> shots to the excited blob; decay during
// readout lands prepared-|1> shots uniformly along the segment between the
// blob centers; MIST mode scatters a fraction of prepared-|1> shots outward
// along an arc, which is what pushes the measured blob distance up.
inline IqShotSet simulate_single_shot(double separation,
                                      const ExperimentNoiseConfig& noise,
                                      std::uint64_t seed) {
  if (separation < 0.0)
    throw ValidationError("simulate_single_shot: separation must be >= 0");
  validate(noise);
  Philox rng(seed);
  IqShotSet set;
  set.n_per_state = noise.shots_per_point;
  set.shots.reserve(2 * noise.shots_per_point);
  const double sigma = noise.iq_blob_sigma;
  for (long k = 0; k < noise.shots_per_point; ++k) {
    IqShot shot;
    shot.prepared_state = 0;
    const double cx = rng.bernoulli(noise.thermal_excitation_p) ? separation : 0.0;
    shot.i = cx + sigma * rng.normal();
    shot.q = sigma * rng.normal();
    set.shots.push_back(shot);
  }
  for (long k = 0; k < noise.shots_per_point; ++k) {
    IqShot shot;
    shot.prepared_state = 1;
    if (noise.mist_mode && rng.bernoulli(noise.mist_fraction)) {
      const double radius =
          separation + std::fabs(rng.normal()) * noise.mist_spread_scale;
      const double angle = 0.35 * rng.normal();
      shot.i = radius * std::cos(angle) + sigma * rng.normal();
      shot.q = radius * std::sin(angle) + sigma * rng.normal();
    } else if (rng.bernoulli(noise.decay_during_readout_p)) {
      const double u = rng.uniform();
      shot.i = u * separation + sigma * rng.normal();
      shot.q = sigma * rng.normal();
    } else {
      shot.i = separation + sigma * rng.normal();
      shot.q = sigma * rng.normal();
    }
    set.shots.push_back(shot);
  }
  validate(set);
  return set;
}

// ---------------------------------------------------------------------------
// JSON config parsing (generator configs are logged next to every output)
// ---------------------------------------------------------------------------

inline ExperimentNoiseConfig noise_config_from_json(const nlohmann::json& j,
                                                    bool single_shot = false) {
  ExperimentNoiseConfig cfg = single_shot
                                  ? ExperimentNoiseConfig::single_shot_defaults()
                                  : ExperimentNoiseConfig::curve_defaults();
  cfg.shots_per_point = j.value("shots_per_point", cfg.shots_per_point);
  cfg.iq_blob_sigma = j.value("iq_blob_sigma", cfg.iq_blob_sigma);
  cfg.thermal_excitation_p = j.value("thermal_excitation_p", cfg.thermal_excitation_p);
  cfg.decay_during_readout_p =
      j.value("decay_during_readout_p", cfg.decay_during_readout_p);
  cfg.mist_mode = j.value("mist_mode", cfg.mist_mode);
  cfg.mist_fraction = j.value("mist_fraction", cfg.mist_fraction);
  cfg.mist_spread_scale = j.value("mist_spread_scale", cfg.mist_spread_scale);
  cfg.ideal = j.value("ideal", cfg.ideal);
  validate(cfg);
  return cfg;
}

}  // namespace qlab
