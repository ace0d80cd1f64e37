#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qlab/expsim.hpp"
#include "qlab/readout.hpp"

#include "oracles.hpp"

using namespace qlab;

TEST_CASE("noiseless decay curve passes through the forward model exactly") {
  const double t1 = 50e-6;
  ExperimentNoiseConfig noise;
  noise.ideal = true;
  const auto grid = default_decay_grid(t1);
  const auto curve = simulate_decay_curve(t1, grid, noise, 3);
  REQUIRE(curve.delays_s.size() == 40);
  CHECK(curve.populations.front() == 1.0);  // tau = 0 -> A + B exactly
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK_THAT(curve.populations[i],
               Catch::Matchers::WithinRel(std::exp(-grid[i] / t1), 1e-15));
}

TEST_CASE("binomial sampling keeps populations in [0,1] and near the model") {
  const double t1 = 30e-6;
  ExperimentNoiseConfig noise;
  noise.shots_per_point = 1024;
  const auto curve =
      simulate_decay_curve(t1, default_decay_grid(t1), noise, 11);
  for (std::size_t i = 0; i < curve.delays_s.size(); ++i) {
    CHECK(curve.populations[i] >= 0.0);
    CHECK(curve.populations[i] <= 1.0);
    const double p = std::exp(-curve.delays_s[i] / t1);
    const double se = std::sqrt(p * (1 - p) / 1024.0) + 1e-6;
    CHECK(std::fabs(curve.populations[i] - p) < 6.0 * se);
  }
}

TEST_CASE("virtual-Z phase arithmetic") {
  CHECK_THAT(virtual_z_phase(1e4, 50e-6), Catch::Matchers::WithinAbs(kPi, 1e-9));
  CHECK_THAT(virtual_z_phase(1e4, 100e-6), Catch::Matchers::WithinAbs(0.0, 1e-9));
  CHECK(virtual_z_phase(1e4, 37e-6) >= 0.0);
  CHECK(virtual_z_phase(1e4, 37e-6) < 2.0 * kPi);
}

TEST_CASE("zero offset with 10 kHz detuning oscillates at exactly 10 kHz") {
  ExperimentNoiseConfig noise;
  noise.ideal = true;
  const auto grid = default_ramsey_grid(250e-6, 80e3);
  const auto curve =
      simulate_ramsey_curve(0.0, 51.26e-6, 1e4, 250e-6, noise, 1, &grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expected =
        0.5 * std::cos(2.0 * kPi * 1e4 * grid[i]) *
            std::exp(-grid[i] / 51.26e-6) +
        0.5;
    CHECK_THAT(curve.populations[i], Catch::Matchers::WithinAbs(expected, 1e-9));
  }
}

TEST_CASE("default ramsey grid samples at twice the nyquist frequency") {
  const auto grid = default_ramsey_grid(250e-6, 80e3);
  REQUIRE(grid.size() == 41);  // 250 us / 6.25 us + 1
  CHECK_THAT(grid[1] - grid[0], Catch::Matchers::WithinRel(6.25e-6, 1e-12));
  CHECK(grid.back() <= 250e-6);
}

TEST_CASE("indistinguishable blobs give fidelity 1/2") {
  auto noise = ExperimentNoiseConfig::single_shot_defaults();
  const auto shots = simulate_single_shot(0.0, noise, 21);
  const auto model = fit_discriminator(shots);
  const auto metrics = compute_metrics(shots, model, 4.3e9);
  CHECK(std::fabs(metrics.fidelity - 0.5) < 0.02);
  CHECK(metrics.delta_m < 0.2);
}

TEST_CASE("well-separated blobs give near-unit fidelity") {
  auto noise = ExperimentNoiseConfig::single_shot_defaults();
  noise.iq_blob_sigma = 1.0;
  const auto shots = simulate_single_shot(10.0, noise, 22);
  const auto model = fit_discriminator(shots);
  const auto metrics = compute_metrics(shots, model, 4.3e9);
  CHECK(metrics.fidelity > 0.999);
  CHECK_THAT(metrics.delta_m, Catch::Matchers::WithinAbs(10.0, 0.2));
}

TEST_CASE("thermal excitation is recovered as P(1|0)") {
  auto noise = ExperimentNoiseConfig::single_shot_defaults();
  noise.thermal_excitation_p = 0.02;
  const auto shots = simulate_single_shot(10.0, noise, 23);
  const auto model = fit_discriminator(shots);
  const auto metrics = compute_metrics(shots, model, 4.3e9);
  CHECK(std::fabs(metrics.confusion[1][0] - 0.02) < 0.005);
}

TEST_CASE("iq marginals are gaussian at the 1% level (non-MIST)") {
  auto noise = ExperimentNoiseConfig::single_shot_defaults();  // 4096 shots
  const auto shots = simulate_single_shot(8.0, noise, 29);
  std::vector<double> i0, q0, i1, q1;
  for (const auto& s : shots.shots) {
    if (s.prepared_state == 0) {
      i0.push_back(s.i);
      q0.push_back(s.q);
    } else {
      i1.push_back(s.i);
      q1.push_back(s.q);
    }
  }
  // Jarque-Bera 1% critical value for chi2(2) is 9.21
  CHECK(oracle::jarque_bera(i0) < 9.21);
  CHECK(oracle::jarque_bera(q0) < 9.21);
  CHECK(oracle::jarque_bera(i1) < 9.21);
  CHECK(oracle::jarque_bera(q1) < 9.21);
}

TEST_CASE("MIST mode scatters excited shots and inflates the blob distance") {
  auto noise = ExperimentNoiseConfig::single_shot_defaults();
  const auto clean = simulate_single_shot(8.0, noise, 31);
  noise.mist_mode = true;
  noise.mist_fraction = 0.5;
  noise.mist_spread_scale = 8.0;
  const auto mist = simulate_single_shot(8.0, noise, 31);
  const auto m_clean = compute_metrics(clean, fit_discriminator(clean), 4.3e9);
  const auto m_mist = compute_metrics(mist, fit_discriminator(mist), 4.3e9);
  CHECK(m_mist.delta_m > 1.3 * m_clean.delta_m);
}

TEST_CASE("decay during readout raises P(0|1)") {
  auto noise = ExperimentNoiseConfig::single_shot_defaults();
  const auto clean = simulate_single_shot(10.0, noise, 37);
  noise.decay_during_readout_p = 0.1;
  const auto decayed = simulate_single_shot(10.0, noise, 37);
  const auto mc = compute_metrics(clean, fit_discriminator(clean), 4.3e9);
  const auto md = compute_metrics(decayed, fit_discriminator(decayed), 4.3e9);
  CHECK(md.confusion[0][1] > mc.confusion[0][1] + 0.02);
  CHECK(md.fidelity < mc.fidelity);
}

TEST_CASE("noise config validation") {
  ExperimentNoiseConfig noise;
  noise.thermal_excitation_p = 1.2;
  CHECK_THROWS_AS(validate(noise), ValidationError);
  noise = {};
  noise.shots_per_point = 0;
  CHECK_THROWS_AS(validate(noise), ValidationError);
  noise = {};
  noise.iq_blob_sigma = -1.0;
  CHECK_THROWS_AS(validate(noise), ValidationError);
}

TEST_CASE("simulators are pure functions of config and seed") {
  ExperimentNoiseConfig noise;
  noise.shots_per_point = 256;
  const auto a = simulate_decay_curve(30e-6, default_decay_grid(30e-6), noise, 5);
  const auto b = simulate_decay_curve(30e-6, default_decay_grid(30e-6), noise, 5);
  CHECK(a.populations == b.populations);
  const auto c = simulate_decay_curve(30e-6, default_decay_grid(30e-6), noise, 6);
  CHECK(a.populations != c.populations);
}
