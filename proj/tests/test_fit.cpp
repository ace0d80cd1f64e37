#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qlab/expsim.hpp"
#include "qlab/fit.hpp"
#include "qlab/rician.hpp"
#include "qlab/rng.hpp"

#include "oracles.hpp"

using namespace qlab;

namespace {

DecayCurve make_decay(double a, double b, double t1, int n = 40) {
  DecayCurve c;
  c.delays_s = default_decay_grid(t1, n);
  for (const double tau : c.delays_s)
    c.populations.push_back(a * std::exp(-tau / t1) + b);
  return c;
}

}  // namespace

TEST_CASE("noiseless exponential fit is exact") {
  const double t1 = 50e-6;
  const auto curve = make_decay(1.0, 0.0, t1);
  const auto fit = fit_exponential(curve);
  REQUIRE(fit.converged);
  CHECK_THAT(fit.params.at("t1"), Catch::Matchers::WithinRel(t1, 1e-6));
  CHECK_THAT(fit.params.at("amplitude"), Catch::Matchers::WithinRel(1.0, 1e-6));
  CHECK_THAT(fit.params.at("offset"), Catch::Matchers::WithinAbs(0.0, 1e-8));
}

TEST_CASE("flat decay data raises a degeneracy error") {
  DecayCurve c;
  for (int i = 0; i < 10; ++i) {
    c.delays_s.push_back(i * 1e-6);
    c.populations.push_back(0.3);
  }
  CHECK_THROWS_AS(fit_exponential(c), DegenerateDataError);
}

TEST_CASE("fit arity floors") {
  DecayCurve c;
  c.delays_s = {0, 1e-6, 2e-6};
  c.populations = {0.9, 0.8, 0.7};
  CHECK_THROWS_AS(fit_exponential(c), InsufficientDataError);

  RamseyCurve r;
  r.t_max_s = 1e-5;
  r.set_detuning_hz = 1e4;
  for (int i = 0; i < 7; ++i) {
    r.delays_s.push_back(i * 1e-6);
    r.populations.push_back(0.5);
  }
  CHECK_THROWS_AS(fit_damped_cosine(r), InsufficientDataError);
}

TEST_CASE("closed loop: binomial noise at 1024 shots recovers T1") {
  // 100 seeded runs, T1 = 30 us; median within 5% and >= 90 runs within 5%
  const double t1 = 30e-6;
  ExperimentNoiseConfig noise;
  noise.shots_per_point = 1024;
  std::vector<double> rel_errs;
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto curve =
        simulate_decay_curve(t1, default_decay_grid(t1), noise, seed);
    const auto fit = fit_exponential(curve);
    REQUIRE(fit.converged);
    const double err = std::fabs(fit.params.at("t1") / t1 - 1.0);
    rel_errs.push_back(err);
    if (err < 0.05) ++within;
  }
  std::nth_element(rel_errs.begin(), rel_errs.begin() + 50, rel_errs.end());
  CHECK(rel_errs[50] < 0.05);
  CHECK(within >= 90);
}

TEST_CASE("noiseless damped cosine fit is exact (A.2 settings)") {
  // t_max 250 us, detuning 10 kHz, T2* = 51.26 us, Nyquist 80 kHz
  const double t2 = 51.26e-6, t_max = 250e-6, detuning = 1e4;
  ExperimentNoiseConfig noise;
  noise.ideal = true;
  const auto grid = default_ramsey_grid(t_max, 80e3);
  const auto curve =
      simulate_ramsey_curve(0.0, t2, detuning, t_max, noise, 1, &grid);
  const auto fit = fit_damped_cosine(curve);
  REQUIRE(fit.converged);
  CHECK_THAT(fit.params.at("f_ramsey"), Catch::Matchers::WithinRel(1e4, 1e-6));
  CHECK_THAT(fit.params.at("t2_star"), Catch::Matchers::WithinRel(t2, 1e-6));
  CHECK(!fit.has_flag("alias_suspect"));
}

TEST_CASE("A.2 settings with shot noise recover both within 2%") {
  const double t2 = 51.26e-6, t_max = 250e-6, detuning = 1e4;
  ExperimentNoiseConfig noise;
  noise.shots_per_point = 1024;
  const auto grid = default_ramsey_grid(t_max, 80e3);
  const auto curve =
      simulate_ramsey_curve(0.0, t2, detuning, t_max, noise, 7, &grid);
  const auto fit = fit_damped_cosine(curve);
  REQUIRE(fit.converged);
  CHECK_THAT(fit.params.at("f_ramsey"), Catch::Matchers::WithinRel(1e4, 0.02));
  CHECK_THAT(fit.params.at("t2_star"), Catch::Matchers::WithinRel(t2, 0.02));
}

TEST_CASE("aliased fringe folds to |f - k fs| and is flagged") {
  // true fringe 90 kHz sampled at 160 kHz: folds to 70 kHz
  const double t2 = 51.26e-6, t_max = 250e-6, detuning = 1e4;
  const double true_offset = -80e3;  // fringe = |detuning - offset| = 90 kHz
  ExperimentNoiseConfig noise;
  noise.ideal = true;
  const auto grid = default_ramsey_grid(t_max, 80e3);
  const auto curve =
      simulate_ramsey_curve(true_offset, t2, detuning, t_max, noise, 1, &grid);
  const auto fit = fit_damped_cosine(curve);
  const double fs = 160e3;
  const double folded = std::fabs(90e3 - fs);  // folding arithmetic oracle
  CHECK_THAT(fit.params.at("f_ramsey"),
             Catch::Matchers::WithinRel(folded, 1e-3));
  CHECK(fit.has_flag("alias_suspect"));
}

TEST_CASE("B.4 settings with +3 kHz drive offset give an 18 kHz fringe") {
  // t_max 100 us, detuning 15 kHz, Nyquist 200 kHz; drive 3 kHz above the
  // qubit means qubit offset -3 kHz and fringe 15 + 3 = 18 kHz
  const double t2 = 15.96e-6, t_max = 100e-6, detuning = 15e3;
  ExperimentNoiseConfig noise;
  noise.ideal = true;
  const auto grid = default_ramsey_grid(t_max, 200e3);
  const auto curve =
      simulate_ramsey_curve(-3e3, t2, detuning, t_max, noise, 1, &grid);
  const auto fit = fit_damped_cosine(curve);
  REQUIRE(fit.converged);
  CHECK_THAT(fit.params.at("f_ramsey"), Catch::Matchers::WithinRel(18e3, 1e-6));
  CHECK(!fit.has_flag("alias_suspect"));
}

TEST_CASE("subresolution fringe is flagged as unresolved") {
  const double t_max = 250e-6;  // 1/t_max = 4 kHz
  ExperimentNoiseConfig noise;
  noise.ideal = true;
  const auto grid = default_ramsey_grid(t_max, 80e3);
  const auto curve =
      simulate_ramsey_curve(7e3, 80e-6, 1e4, t_max, noise, 1, &grid);
  // fringe = |10 - 7| = 3 kHz < 1/t_max
  const auto fit = fit_damped_cosine(curve);
  CHECK_THAT(fit.params.at("f_ramsey"), Catch::Matchers::WithinRel(3e3, 0.02));
  CHECK(fit.has_flag("unresolved_frequency"));
}

TEST_CASE("drive calibration algebra") {
  const double f_q = 4.332736e9;
  // drive 5 kHz above the qubit, 10 kHz detuning -> 15 kHz fringe
  CHECK_THAT(resolve_drive_calibration(f_q + 5e3, 15e3, 10e3),
             Catch::Matchers::WithinRel(f_q, 1e-12));
  // fringe exactly at the detuning: calibration is a no-op
  CHECK_THAT(resolve_drive_calibration(f_q, 10e3, 10e3),
             Catch::Matchers::WithinRel(f_q, 1e-12));
  // drive 4 kHz below: fringe 6 kHz, calibration still lands on f_q
  CHECK_THAT(resolve_drive_calibration(f_q - 4e3, 6e3, 10e3),
             Catch::Matchers::WithinRel(f_q, 1e-12));
}

TEST_CASE("sign resolution: fitted fringe minus detuning tracks -offset") {
  // end to end through simulator and fitter, both offset signs
  ExperimentNoiseConfig noise;
  noise.ideal = true;
  const double t2 = 51.26e-6, t_max = 250e-6, detuning = 1e4;
  const auto grid = default_ramsey_grid(t_max, 80e3);
  for (const double offset : {4e3, -4e3}) {
    const auto curve =
        simulate_ramsey_curve(offset, t2, detuning, t_max, noise, 3, &grid);
    const auto fit = fit_damped_cosine(curve);
    const double measured = std::fabs(fit.params.at("f_ramsey")) - detuning;
    CHECK_THAT(measured, Catch::Matchers::WithinRel(-offset, 1e-5));
    // and the drive-calibration identity recovers f_q exactly: with
    // f_drive = f_q - offset, f_cal = f_drive - (fringe - detuning) = f_q
    const double f_q = 4.3e9;
    const double f_drive = f_q - offset;
    CHECK_THAT(
        resolve_drive_calibration(f_drive, fit.params.at("f_ramsey"), detuning),
        Catch::Matchers::WithinRel(f_q, 1e-9));
  }
}

TEST_CASE("affine rescaling of P1 leaves T1, T2*, f invariant") {
  const double t1 = 40e-6;
  auto curve = make_decay(1.0, 0.0, t1);
  auto scaled = curve;
  for (double& p : scaled.populations) p = 0.45 * p + 0.3;
  const auto fit1 = fit_exponential(curve);
  const auto fit2 = fit_exponential(scaled);
  CHECK_THAT(fit2.params.at("t1"),
             Catch::Matchers::WithinRel(fit1.params.at("t1"), 1e-8));

  ExperimentNoiseConfig noise;
  noise.ideal = true;
  const auto grid = default_ramsey_grid(250e-6, 80e3);
  auto ramsey = simulate_ramsey_curve(0.0, 51.26e-6, 1e4, 250e-6, noise, 1,
                                      &grid);
  auto ramsey2 = ramsey;
  for (double& p : ramsey2.populations) p = 0.6 * p + 0.2;
  const auto rf1 = fit_damped_cosine(ramsey);
  const auto rf2 = fit_damped_cosine(ramsey2);
  CHECK_THAT(rf2.params.at("f_ramsey"),
             Catch::Matchers::WithinRel(rf1.params.at("f_ramsey"), 1e-8));
  CHECK_THAT(rf2.params.at("t2_star"),
             Catch::Matchers::WithinRel(rf1.params.at("t2_star"), 1e-6));
}

TEST_CASE("residual norm is self-consistent with the fitted model") {
  ExperimentNoiseConfig noise;
  noise.shots_per_point = 1024;
  const double t1 = 30e-6;
  const auto curve = simulate_decay_curve(t1, default_decay_grid(t1), noise, 5);
  const auto fit = fit_exponential(curve);
  double ssr = 0.0;
  const std::vector<double> p = {fit.params.at("amplitude"),
                                 fit.params.at("offset"), fit.params.at("t1")};
  for (std::size_t k = 0; k < curve.delays_s.size(); ++k) {
    const double r =
        exponential_model(p, curve.delays_s[k]) - curve.populations[k];
    ssr += r * r;
  }
  CHECK_THAT(std::sqrt(ssr),
             Catch::Matchers::WithinRel(fit.residual_norm, 1e-12));
}

// ---------------------------------------------------------------------------
// Jacobian hygiene: analytic gradients vs central differences at 100 random
// parameter points per model (natural lab units keep components O(1)).
// ---------------------------------------------------------------------------

namespace {

template <class Eval>
void check_gradient(Eval&& eval, const std::vector<double>& p, double x) {
  const std::size_t n = p.size();
  std::vector<double> analytic(n);
  eval(p, x, analytic.data());
  double norm = 1e-12;
  for (double g : analytic) norm = std::max(norm, std::fabs(g));
  for (std::size_t i = 0; i < n; ++i) {
    const double fd = oracle::central_diff(
        [&](const std::vector<double>& q) { return eval(q, x, nullptr); }, p,
        i);
    CHECK(std::fabs(fd - analytic[i]) <= 1e-6 * std::max({std::fabs(fd),
                                                          std::fabs(analytic[i]),
                                                          1e-3 * norm}));
  }
}

}  // namespace

TEST_CASE("analytic jacobians match central finite differences") {
  Philox rng(2024);
  auto exp_eval = [](const std::vector<double>& p, double x, double* g) {
    return exponential_model(p, x, g);
  };
  auto cos_eval = [](const std::vector<double>& p, double x, double* g) {
    return damped_cosine_model(p, x, g);
  };
  auto rice_eval = [](const std::vector<double>& p, double x, double* g) {
    const RicianParams rp{p[0], p[1], p[2]};
    if (!g) return mirrored_rician_pdf(x, rp);
    return mirrored_rician_pdf_grad(x, rp, g);
  };

  for (int trial = 0; trial < 100; ++trial) {
    // exponential in microsecond units
    const std::vector<double> pe = {rng.uniform(0.5, 1.5),
                                    rng.uniform(-0.2, 0.4),
                                    rng.uniform(10.0, 100.0)};
    check_gradient(exp_eval, pe, rng.uniform(0.0, 3.0 * pe[2]));

    // damped cosine, frequency in cycles per microsecond
    const std::vector<double> pc = {rng.uniform(0.3, 0.7),
                                    rng.uniform(0.2, 0.8),
                                    rng.uniform(-2.0, 2.0),
                                    rng.uniform(0.005, 0.08),
                                    rng.uniform(15.0, 80.0)};
    check_gradient(cos_eval, pc, rng.uniform(0.0, 250.0));

    // mirrored rician in the smooth identifiable region
    const double sigma = rng.uniform(2.0, 8.0);
    const double nu = rng.uniform(0.5, 3.0) * sigma;
    const double t_max = rng.uniform(60.0, 100.0);
    const double t = t_max - std::max(0.3 * sigma, nu + sigma * rng.uniform(-2.5, 2.5));
    check_gradient(rice_eval, {nu, sigma, t_max}, t);
  }
}
