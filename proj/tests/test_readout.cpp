#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qlab/expsim.hpp"
#include "qlab/readout.hpp"
#include "qlab/rng.hpp"

using namespace qlab;

namespace {

IqShotSet blob_pair(double cx0, double cy0, double cx1, double cy1,
                    double sigma, long n, std::uint64_t seed) {
  Philox rng(seed);
  IqShotSet set;
  set.n_per_state = n;
  for (long k = 0; k < n; ++k)
    set.shots.push_back({cx0 + sigma * rng.normal(), cy0 + sigma * rng.normal(), 0});
  for (long k = 0; k < n; ++k)
    set.shots.push_back({cx1 + sigma * rng.normal(), cy1 + sigma * rng.normal(), 1});
  return set;
}

}  // namespace

TEST_CASE("delta_m is the euclidean distance of the class means") {
  // degenerate clouds pinned at the exact centers
  IqShotSet set;
  for (int k = 0; k < 8; ++k) {
    set.shots.push_back({0.0, 0.0, 0});
    set.shots.push_back({3.0, 4.0, 1});
  }
  set.n_per_state = 8;
  const auto model = fit_discriminator(set);
  CHECK(model.regularized);  // zero covariance needed the ridge
  const auto metrics = compute_metrics(set, model, 4.3e9);
  CHECK_THAT(metrics.delta_m, Catch::Matchers::WithinRel(5.0, 1e-12));
}

TEST_CASE("identical class covariances make the boundary linear") {
  // class 1 is class 0 translated: sample covariances match exactly
  Philox rng(5);
  IqShotSet set;
  std::vector<std::pair<double, double>> cloud;
  for (int k = 0; k < 500; ++k)
    cloud.emplace_back(rng.normal(), 0.5 * rng.normal());
  for (const auto& [x, y] : cloud) set.shots.push_back({x, y, 0});
  for (const auto& [x, y] : cloud) set.shots.push_back({x + 6.0, y, 1});
  set.n_per_state = 500;
  const auto model = fit_discriminator(set);
  CHECK_THAT(model.cls[0].inv.xx,
             Catch::Matchers::WithinRel(model.cls[1].inv.xx, 1e-12));
  CHECK_THAT(model.cls[0].inv.yy,
             Catch::Matchers::WithinRel(model.cls[1].inv.yy, 1e-12));
  // quadratic term of the decision rule vanishes: the boundary, traced at
  // three heights, is a straight (possibly tilted) line
  auto boundary_x = [&](double q) {
    double lo = -3.0, hi = 9.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (qda_score(model, 1, mid, q) > qda_score(model, 0, mid, q) ? hi : lo) =
          mid;
    }
    return 0.5 * (lo + hi);
  };
  const double x_lo = boundary_x(-3.0), x_mid = boundary_x(0.0),
               x_hi = boundary_x(3.0);
  CHECK_THAT(x_mid, Catch::Matchers::WithinAbs(0.5 * (x_lo + x_hi), 1e-9));
}

TEST_CASE("duplicated shots trigger covariance regularization") {
  IqShotSet set;
  for (int k = 0; k < 16; ++k) set.shots.push_back({1.0, 1.0, 0});
  for (int k = 0; k < 16; ++k) set.shots.push_back({4.0, 1.0, 1});
  set.n_per_state = 16;
  const auto model = fit_discriminator(set);
  CHECK(model.regularized);
  const auto metrics = compute_metrics(set, model, 4.3e9);
  CHECK(metrics.fidelity == 1.0);  // separated delta clouds classify exactly
  bool flagged = false;
  for (const auto& f : metrics.flags) flagged |= f == "covariance_regularized";
  CHECK(flagged);
}

TEST_CASE("recovered means sit within the gaussian standard error") {
  const long n = 4096;
  const double sigma = 1.0;
  const auto set = blob_pair(0.0, 0.0, 7.0, -2.0, sigma, n, 13);
  const auto model = fit_discriminator(set);
  const double se = 3.0 * sigma / std::sqrt(static_cast<double>(n));
  CHECK(std::fabs(model.cls[0].mean[0] - 0.0) < se);
  CHECK(std::fabs(model.cls[0].mean[1] - 0.0) < se);
  CHECK(std::fabs(model.cls[1].mean[0] - 7.0) < se);
  CHECK(std::fabs(model.cls[1].mean[1] + 2.0) < se);
}

TEST_CASE("fidelity from the confusion matrix") {
  CHECK(fidelity_from_confusion(0.99, 0.98) == 0.985);
}

TEST_CASE("effective temperature reproduces the direct evaluation") {
  // independent constants: h and k_B typed out rather than taken from the
  // library, f_q from the A.1 design row
  const double h = 6.62607015e-34, kb = 1.380649e-23;
  const double f_q = 4.332736e9;
  const double expected = -h * f_q / (kb * std::log(0.01 / 0.99));
  CHECK_THAT(expected * 1e3, Catch::Matchers::WithinAbs(45.25, 0.05));  // mK
  CHECK_THAT(effective_temperature_k(0.01, 0.99, f_q),
             Catch::Matchers::WithinRel(expected, 1e-12));
}

TEST_CASE("anti-correlation: more excitation lowers F and raises T_eff") {
  const double f_q = 4.332736e9;
  double prev_f = 2.0, prev_t = -1.0;
  for (const double p10 : {0.002, 0.01, 0.03, 0.08, 0.2}) {
    const double p00 = 1.0 - p10;
    const double fid = fidelity_from_confusion(p00, 0.98);
    const double t_eff = effective_temperature_k(p10, p00, f_q);
    CHECK(fid < prev_f);
    CHECK(t_eff > prev_t);
    prev_f = fid;
    prev_t = t_eff;
  }
}

TEST_CASE("end-to-end thermal sweep is monotone") {
  auto noise = ExperimentNoiseConfig::single_shot_defaults();
  double prev_f = 2.0, prev_t = -1.0;
  for (const double p : {0.01, 0.03, 0.06, 0.10}) {
    noise.thermal_excitation_p = p;
    const auto shots = simulate_single_shot(10.0, noise, 1234);
    const auto metrics = compute_metrics(shots, fit_discriminator(shots), 4.3e9);
    CHECK(metrics.fidelity < prev_f);
    CHECK(metrics.t_eff_k > prev_t);
    prev_f = metrics.fidelity;
    prev_t = metrics.t_eff_k;
  }
}

TEST_CASE("delta_m is invariant under global rotation and translation") {
  const auto set = blob_pair(0.0, 0.0, 5.0, 1.0, 1.0, 512, 3);
  const auto m1 = compute_metrics(set, fit_discriminator(set), 4.3e9);
  const double c = std::cos(0.7), s = std::sin(0.7);
  IqShotSet moved = set;
  for (auto& shot : moved.shots) {
    const double x = shot.i, y = shot.q;
    shot.i = c * x - s * y + 11.0;
    shot.q = s * x + c * y - 4.0;
  }
  const auto m2 = compute_metrics(moved, fit_discriminator(moved), 4.3e9);
  CHECK_THAT(m2.delta_m, Catch::Matchers::WithinRel(m1.delta_m, 1e-12));
}

TEST_CASE("training accuracy beats the majority baseline") {
  const auto set = blob_pair(0.0, 0.0, 2.0, 0.0, 1.0, 2048, 8);
  const auto model = fit_discriminator(set);
  const auto metrics = compute_metrics(set, model, 4.3e9);
  const double accuracy =
      0.5 * (metrics.confusion[0][0] + metrics.confusion[1][1]);
  CHECK(accuracy >= 0.5);
}

TEST_CASE("confusion rows sum to one and zero excitation hits the floor") {
  IqShotSet set;
  Philox rng(2);
  for (int k = 0; k < 64; ++k)
    set.shots.push_back({0.01 * rng.normal(), 0.01 * rng.normal(), 0});
  for (int k = 0; k < 64; ++k)
    set.shots.push_back({10.0 + 0.01 * rng.normal(), 0.01 * rng.normal(), 1});
  set.n_per_state = 64;
  const auto metrics = compute_metrics(set, fit_discriminator(set), 4.3e9);
  CHECK_THAT(metrics.confusion[0][0] + metrics.confusion[1][0],
             Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(metrics.confusion[0][1] + metrics.confusion[1][1],
             Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK(metrics.t_eff_k == 0.0);  // 0 K sentinel
  bool flagged = false;
  for (const auto& f : metrics.flags)
    flagged |= f == "t_eff_floor_no_excitation";
  CHECK(flagged);
}
