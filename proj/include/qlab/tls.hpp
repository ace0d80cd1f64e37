#pragma once

#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qlab/errors.hpp"
#include "qlab/math.hpp"
#include "qlab/rician.hpp"
#include "qlab/rng.hpp"
#include "qlab/types.hpp"

namespace qlab {

// ---------------------------------------------------------------------------
// Defect model. Each defect contributes a Lorentzian relaxation channel
//     rate(g, gamma, delta) = 4 g^2 gamma / (gamma^2 + 4 delta^2)   [1/s]
// peaking at 4 g^2 / gamma on resonance. The microscopic form is a standard
// weak-coupling choice and is isolated here so it can be swapped.
// ---------------------------------------------------------------------------

enum class TlsDynamics { telegraphic, diffusive };

inline const char* to_string(TlsDynamics d) {
  return d == TlsDynamics::telegraphic ? "telegraphic" : "diffusive";
}

inline TlsDynamics tls_dynamics_from_string(const std::string& s) {
  if (s == "telegraphic") return TlsDynamics::telegraphic;
  if (s == "diffusive") return TlsDynamics::diffusive;
  throw ValidationError("unknown dynamics '" + s +
                        "' (expected telegraphic or diffusive)");
}

inline double single_tls_rate(double coupling_hz, double gamma_hz,
                              double detuning_hz) {
  return 4.0 * coupling_hz * coupling_hz * gamma_hz /
         (gamma_hz * gamma_hz + 4.0 * detuning_hz * detuning_hz);
}

struct TlsDefect {
  double coupling_hz = 0.0;
  double gamma_hz = 0.0;
  TlsDynamics dynamics = TlsDynamics::diffusive;
  double rate = 0.0;  // telegraphic: switch rate 1/s; diffusive: Hz^2/s
  double detuning_hz = 0.0;      // current detuning
  double alt_detuning_hz = 0.0;  // other telegraph level (unused if diffusive)
};

struct TlsEnsemble {
  std::vector<TlsDefect> defects;
  double background_rate = 0.0;  // 1/s
  double delta_band_hz = 0.0;    // reflecting band for diffusive defects

  std::size_t n_tls() const { return defects.size(); }
};

inline void validate(const TlsEnsemble& e) {
  if (e.background_rate < 0.0)
    throw ValidationError("TlsEnsemble: rule background_rate >= 0 violated");
  for (std::size_t i = 0; i < e.defects.size(); ++i) {
    if (!(e.defects[i].coupling_hz > 0.0))
      throw ValidationError("TlsEnsemble: rule g > 0 violated for defect " +
                            std::to_string(i));
    if (!(e.defects[i].gamma_hz > 0.0))
      throw ValidationError("TlsEnsemble: rule gamma > 0 violated for defect " +
                            std::to_string(i));
  }
}

inline double total_decay_rate(const TlsEnsemble& e) {
  double rate = e.background_rate;
  for (const auto& d : e.defects)
    rate += single_tls_rate(d.coupling_hz, d.gamma_hz, d.detuning_hz);
  return rate;
}

// ---------------------------------------------------------------------------
// Ensemble sampling
// ---------------------------------------------------------------------------

struct InjectedDefect {
  double g_hz = 0.0;
  double delta0_hz = 0.0;
  double amplitude_hz = 0.0;  // telegraph levels at delta0 +/- amplitude
  double gamma_hz = 0.0;
  double rate = 0.0;
  TlsDynamics dynamics = TlsDynamics::telegraphic;
};

struct EnsembleConfig {
  long n_tls = 0;
  double g_lo_hz = 0.0;
  double g_hi_hz = 0.0;
  double delta_band_hz = 0.0;
  double gamma_hz = 0.0;
  TlsDynamics dynamics = TlsDynamics::diffusive;
  double rate = 0.0;
  double background_rate = 0.0;
  std::vector<InjectedDefect> injected;
};

inline void validate(const EnsembleConfig& c) {
  if (c.n_tls < 0) throw ValidationError("EnsembleConfig: n_tls must be >= 0");
  if (c.n_tls > 0) {
    if (!(c.g_lo_hz > 0.0) || !(c.g_hi_hz >= c.g_lo_hz))
      throw ValidationError("EnsembleConfig: invalid coupling range g_range_hz");
    if (!(c.delta_band_hz > 0.0))
      throw ValidationError("EnsembleConfig: delta_band_hz must be > 0");
    if (!(c.gamma_hz > 0.0))
      throw ValidationError("EnsembleConfig: gamma_hz must be > 0");
    if (c.rate < 0.0) throw ValidationError("EnsembleConfig: rate must be >= 0");
  }
  if (c.background_rate < 0.0)
    throw ValidationError("EnsembleConfig: background_rate must be >= 0");
  for (const auto& inj : c.injected) {
    if (!(inj.g_hz > 0.0) || !(inj.gamma_hz > 0.0) || inj.rate < 0.0)
      throw ValidationError("EnsembleConfig: invalid injected defect");
  }
}

// Couplings log-uniform over [g_lo, g_hi]; detunings uniform over the band.
// Telegraph defects switch between two independently drawn band positions, so
// the stationary law stays uniform. Deterministic for a given (seed, stream).
inline TlsEnsemble sample_ensemble(const EnsembleConfig& cfg,
                                   std::uint64_t seed,
                                   std::uint64_t stream = 0) {
  validate(cfg);
  Philox rng(seed, stream);
  TlsEnsemble ens;
  ens.background_rate = cfg.background_rate;
  ens.delta_band_hz = cfg.delta_band_hz;
  ens.defects.reserve(static_cast<std::size_t>(cfg.n_tls) + cfg.injected.size());
  const double half = 0.5 * cfg.delta_band_hz;
  for (long i = 0; i < cfg.n_tls; ++i) {
    TlsDefect d;
    d.coupling_hz = (cfg.g_lo_hz == cfg.g_hi_hz)
                        ? cfg.g_lo_hz
                        : rng.log_uniform(cfg.g_lo_hz, cfg.g_hi_hz);
    d.gamma_hz = cfg.gamma_hz;
    d.dynamics = cfg.dynamics;
    d.rate = cfg.rate;
    d.detuning_hz = rng.uniform(-half, half);
    d.alt_detuning_hz = d.dynamics == TlsDynamics::telegraphic
                            ? rng.uniform(-half, half)
                            : 0.0;
    ens.defects.push_back(d);
  }
  for (const auto& inj : cfg.injected) {
    TlsDefect d;
    d.coupling_hz = inj.g_hz;
    d.gamma_hz = inj.gamma_hz;
    d.dynamics = inj.dynamics;
    d.rate = inj.rate;
    if (inj.dynamics == TlsDynamics::telegraphic) {
      // start on the level farther from resonance; the dropout appears when
      // the defect switches in
      const double far_level = inj.delta0_hz + inj.amplitude_hz;
      const double near_level = inj.delta0_hz - inj.amplitude_hz;
      const bool far_is_far = std::fabs(far_level) >= std::fabs(near_level);
      d.detuning_hz = far_is_far ? far_level : near_level;
      d.alt_detuning_hz = far_is_far ? near_level : far_level;
    } else {
      d.detuning_hz = inj.delta0_hz;
    }
    ens.defects.push_back(d);
  }
  validate(ens);
  return ens;
}

// ---------------------------------------------------------------------------
// Spectral dynamics
// ---------------------------------------------------------------------------

inline void evolve_ensemble(TlsEnsemble& ens, double dt, Philox& rng) {
  const double half = 0.5 * ens.delta_band_hz;
  for (auto& d : ens.defects) {
    if (d.rate <= 0.0) continue;
    if (d.dynamics == TlsDynamics::telegraphic) {
      // exact two-state Markov update over dt
      const double p_flip = 0.5 * (1.0 - std::exp(-2.0 * d.rate * dt));
      if (rng.bernoulli(p_flip)) std::swap(d.detuning_hz, d.alt_detuning_hz);
    } else {
      double x = d.detuning_hz + rng.normal() * std::sqrt(d.rate * dt);
      if (half > 0.0) {
        // reflect back into the band
        for (int guard = 0; (x < -half || x > half) && guard < 64; ++guard) {
          if (x < -half) x = -2.0 * half - x;
          if (x > half) x = 2.0 * half - x;
        }
        x = std::clamp(x, -half, half);
      }
      d.detuning_hz = x;
    }
  }
}

// T1 sampled on a fixed cadence while defect detunings evolve. The ensemble
// is taken by value: simulation never mutates the caller's ensemble.
inline TimeTrace simulate_t1_trace(TlsEnsemble ens, double duration_s,
                                   double cadence_s, std::uint64_t seed,
                                   std::uint64_t stream = 0) {
  if (!(duration_s > cadence_s) || !(cadence_s > 0.0))
    throw ValidationError("simulate_t1_trace: require duration > cadence > 0");
  if (ens.defects.empty() && !(ens.background_rate > 0.0))
    throw ValidationError(
        "simulate_t1_trace: empty ensemble with zero background rate");
  Philox rng(seed, stream);
  const auto n_samples =
      static_cast<std::size_t>(std::floor(duration_s / cadence_s + 1e-9)) + 1;
  TimeTrace trace;
  trace.kind = ParameterKind::t1;
  trace.unit = "s";
  trace.timestamps.reserve(n_samples);
  trace.values.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    if (k > 0) evolve_ensemble(ens, cadence_s, rng);
    trace.timestamps.push_back(static_cast<double>(k) * cadence_s);
    trace.values.push_back(1.0 / total_decay_rate(ens));
  }
  validate(trace);
  return trace;
}

// ---------------------------------------------------------------------------
// Per-defect rate statistics under the configured distributions (couplings
// log-uniform, detunings uniform over the band). `temporal_variance` is the
// per-defect variance over its own stationary dynamics averaged over draws;
// `draw_variance` is the variance over fresh defect draws.
// ---------------------------------------------------------------------------

struct SingleTlsMoments {
  double mean_rate = 0.0;
  double temporal_variance = 0.0;
  double draw_variance = 0.0;
};

inline SingleTlsMoments single_tls_moments(double g_lo_hz, double g_hi_hz,
                                           double band_hz, double gamma_hz,
                                           TlsDynamics dynamics) {
  const double u = band_hz / gamma_hz;
  const double c1 = std::atan(u) / band_hz;
  const double c2 =
      (u / (1.0 + u * u) + std::atan(u)) / (2.0 * gamma_hz * band_hz);
  double eg2, eg4;
  if (g_lo_hz == g_hi_hz) {
    eg2 = g_lo_hz * g_lo_hz;
    eg4 = eg2 * eg2;
  } else {
    const double ln_r = std::log(g_hi_hz / g_lo_hz);
    eg2 = (g_hi_hz * g_hi_hz - g_lo_hz * g_lo_hz) / (2.0 * ln_r);
    eg4 = (std::pow(g_hi_hz, 4) - std::pow(g_lo_hz, 4)) / (4.0 * ln_r);
  }
  SingleTlsMoments m;
  m.mean_rate = 4.0 * eg2 * c1;
  const double var_over_band = 16.0 * eg4 * (c2 - c1 * c1);
  // two-level telegraph sees half the band variance per unit time
  m.temporal_variance = dynamics == TlsDynamics::telegraphic
                            ? 0.5 * var_over_band
                            : var_over_band;
  m.draw_variance = 16.0 * (eg4 * c2 - eg2 * eg2 * c1 * c1);
  return m;
}

// Coupling floor that realizes a target fluctuation coefficient
// a = sqrt(Var_temporal / mean) [s^-1/2] for a fixed decade ratio.
inline double coupling_floor_for_target_a(double a_si, double gamma_hz,
                                          double band_hz, double decade) {
  const double u = band_hz / gamma_hz;
  const double c1 = std::atan(u) / band_hz;
  const double c2 =
      (u / (1.0 + u * u) + std::atan(u)) / (2.0 * gamma_hz * band_hz);
  const double r2 = decade * decade;
  return a_si / std::sqrt(2.0 * (r2 + 1.0) * (c2 - c1 * c1) / c1);
}

// ---------------------------------------------------------------------------
// Scaling experiment: synthetic qubits spanning a T1 range through their TLS
// count, identical per-defect statistics, moments extracted through the
// mirrored-Rician histogram pathway.
// ---------------------------------------------------------------------------

struct ScalingConfig {
  int n_qubits = 8;
  double t1_min_s = 10e-6;
  double t1_max_s = 500e-6;
  double target_a_si = 12.2;  // s^-1/2
  double gamma_hz = 1e5;
  double delta_band_hz = 4e6;
  double coupling_decade = 10.0;
  double rate = 0.0;  // 0 -> band mixing time of ~1 hour
  double duration_s = 95.0 * 3600.0;
  double cadence_s = 60.0;
  double background_rate = 0.0;
  int jobs = 0;  // 0 -> hardware concurrency
};

struct ScalingQubitResult {
  std::string label;
  double mean_t1_s = 0.0;
  double std_t1_s = 0.0;
  double std_t1_stderr_s = 0.0;
  long n_samples = 0;
  double span_hours = 0.0;
  bool fit_ok = false;
  std::vector<std::string> flags;
};

inline std::vector<ScalingQubitResult> scaling_experiment(
    const ScalingConfig& cfg, std::uint64_t seed) {
  if (cfg.n_qubits < 3)
    throw ValidationError("scaling_experiment: need >= 3 qubits");
  if (!(cfg.t1_max_s > cfg.t1_min_s) || !(cfg.t1_min_s > 0.0))
    throw ValidationError("scaling_experiment: invalid t1 range");

  const double g_lo = coupling_floor_for_target_a(
      cfg.target_a_si, cfg.gamma_hz, cfg.delta_band_hz, cfg.coupling_decade);
  const auto moments =
      single_tls_moments(g_lo, g_lo * cfg.coupling_decade, cfg.delta_band_hz,
                         cfg.gamma_hz, TlsDynamics::diffusive);
  const double rate = cfg.rate > 0.0
                          ? cfg.rate
                          : cfg.delta_band_hz * cfg.delta_band_hz /
                                (8.0 * 3600.0);

  std::vector<ScalingQubitResult> results(cfg.n_qubits);
  auto worker = [&](int q) {
    ScalingQubitResult& res = results[q];
    res.label = "q" + std::to_string(q);
    const double t1_target =
        cfg.t1_min_s * std::pow(cfg.t1_max_s / cfg.t1_min_s,
                                static_cast<double>(q) /
                                    static_cast<double>(cfg.n_qubits - 1));
    EnsembleConfig ecfg;
    ecfg.n_tls = std::max<long>(
        1, std::lround(1.0 / (moments.mean_rate * t1_target)));
    ecfg.g_lo_hz = g_lo;
    ecfg.g_hi_hz = g_lo * cfg.coupling_decade;
    ecfg.delta_band_hz = cfg.delta_band_hz;
    ecfg.gamma_hz = cfg.gamma_hz;
    ecfg.dynamics = TlsDynamics::diffusive;
    ecfg.rate = rate;
    ecfg.background_rate = cfg.background_rate;
    const auto ens = sample_ensemble(ecfg, seed, 2 * q);
    const auto trace =
        simulate_t1_trace(ens, cfg.duration_s, cfg.cadence_s, seed, 2 * q + 1);

    res.n_samples = static_cast<long>(trace.values.size());
    res.span_hours = trace.timestamps.back() / 3600.0;
    try {
      const auto fit =
          fit_rician_mirrored(trace.values, RicianFitMethod::histogram);
      const auto mom = rician_moments(fit.params);
      res.mean_t1_s = mom.mean;
      res.std_t1_s = mom.stddev;
      res.std_t1_stderr_s = fit.fit.stderrs.count("sigma")
                                ? fit.fit.stderrs.at("sigma")
                                : 0.0;
      res.fit_ok = fit.fit.converged;
      res.flags = fit.fit.flags;
    } catch (const Error& err) {
      res.fit_ok = false;
      res.flags.push_back(std::string("fit_failed: ") + err.what());
    }
  };

  int jobs = cfg.jobs > 0
                 ? cfg.jobs
                 : static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  jobs = std::min(jobs, cfg.n_qubits);
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int q = next.fetch_add(1); q < cfg.n_qubits; q = next.fetch_add(1))
        worker(q);
    });
  for (auto& t : pool) t.join();
  return results;
}

// ---------------------------------------------------------------------------
// JSON config (schema of `simulate tls`)
// ---------------------------------------------------------------------------

inline EnsembleConfig ensemble_config_from_json(const nlohmann::json& j) {
  EnsembleConfig cfg;
  cfg.n_tls = j.value("n_tls", 0L);
  if (j.contains("g_range_hz")) {
    const auto& r = j.at("g_range_hz");
    if (!r.is_array() || r.size() != 2)
      throw ValidationError("config field g_range_hz must be [lo, hi]");
    cfg.g_lo_hz = r[0].get<double>();
    cfg.g_hi_hz = r[1].get<double>();
  }
  cfg.delta_band_hz = j.value("delta_band_hz", 0.0);
  cfg.gamma_hz = j.value("gamma_hz", 0.0);
  if (j.contains("dynamics"))
    cfg.dynamics = tls_dynamics_from_string(j.at("dynamics").get<std::string>());
  cfg.rate = j.value("rate", 0.0);
  cfg.background_rate = j.value("background_rate", 0.0);
  for (const auto& inj : j.value("injected", nlohmann::json::array())) {
    InjectedDefect d;
    d.g_hz = inj.at("g_hz").get<double>();
    d.delta0_hz = inj.value("delta0_hz", 0.0);
    d.amplitude_hz = inj.value("amplitude_hz", 0.0);
    d.gamma_hz = inj.at("gamma_hz").get<double>();
    d.rate = inj.value("rate", 0.0);
    if (inj.contains("dynamics"))
      d.dynamics = tls_dynamics_from_string(inj.at("dynamics").get<std::string>());
    cfg.injected.push_back(d);
  }
  validate(cfg);
  return cfg;
}

}  // namespace qlab
