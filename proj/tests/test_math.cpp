#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qlab/math.hpp"

using namespace qlab;

TEST_CASE("scaled bessel i0e/i1e against reference values") {
  // reference: scipy.special i0e/i1e
  struct Ref {
    double x, i0e, i1e;
  };
  const Ref refs[] = {
      {0.5, 6.4503527044914999e-01, 1.5642080318487173e-01},
      {1.0, 4.6575960759364043e-01, 2.0791041534970850e-01},
      {5.0, 1.8354081260932834e-01, 1.6397226694454234e-01},
      {19.5, 9.0939432095156467e-02, 8.8576086094314846e-02},
      {20.5, 8.8664429015745228e-02, 8.6474113494087249e-02},
      {50.0, 5.6561626647454184e-02, 5.5993123892895395e-02},
      {700.0, 1.5081295651531355e-02, 1.5070519444716846e-02},
  };
  for (const auto& r : refs) {
    CHECK_THAT(bessel_i0e(r.x), Catch::Matchers::WithinRel(r.i0e, 1e-12));
    CHECK_THAT(bessel_i1e(r.x), Catch::Matchers::WithinRel(r.i1e, 1e-12));
  }
  CHECK(bessel_i0e(0.0) == 1.0);
  CHECK(bessel_i1e(0.0) == 0.0);
  CHECK(bessel_i1e(-1.0) == -bessel_i1e(1.0));
  // no overflow far beyond the naive exp range
  CHECK(std::isfinite(log_bessel_i0(5000.0)));
}

TEST_CASE("adaptive quadrature hits analytic integrals") {
  const auto g = integrate([](double x) { return std::exp(-x * x); }, -8.0, 8.0,
                           1e-12);
  CHECK_THAT(g.value, Catch::Matchers::WithinRel(std::sqrt(kPi), 1e-10));

  const auto osc =
      integrate([](double x) { return std::sin(5.0 * x); }, 0.0, kPi, 1e-12);
  CHECK_THAT(osc.value, Catch::Matchers::WithinAbs(0.4, 1e-10));

  // narrow peak inside a wide window exercises the adaptive subdivision
  const double s = 0.05;
  const auto peak = integrate(
      [&](double x) {
        const double d = (x - 40.0) / s;
        return std::exp(-0.5 * d * d);
      },
      0.0, 80.0, 1e-10);
  CHECK_THAT(peak.value,
             Catch::Matchers::WithinRel(s * std::sqrt(2.0 * kPi), 1e-8));
}

TEST_CASE("solve_dense and invert_dense") {
  const std::vector<double> a = {4, 1, 2, 1, 5, 1, 2, 1, 6};
  const std::vector<double> b = {1, 2, 3};
  const auto x = solve_dense(a, b);
  for (int r = 0; r < 3; ++r) {
    double acc = 0;
    for (int c = 0; c < 3; ++c) acc += a[r * 3 + c] * x[c];
    CHECK_THAT(acc, Catch::Matchers::WithinAbs(b[r], 1e-12));
  }
  const auto inv = invert_dense(a, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double acc = 0;
      for (int k = 0; k < 3; ++k) acc += a[r * 3 + k] * inv[k * 3 + c];
      CHECK_THAT(acc, Catch::Matchers::WithinAbs(r == c ? 1.0 : 0.0, 1e-12));
    }
  CHECK_THROWS_AS(solve_dense({0, 0, 0, 0}, {1, 1}), Error);
}

TEST_CASE("sample statistics") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  CHECK_THAT(mean(xs), Catch::Matchers::WithinAbs(2.5, 1e-15));
  CHECK_THAT(variance(xs), Catch::Matchers::WithinRel(5.0 / 3.0, 1e-14));
  CHECK_THAT(skewness(xs), Catch::Matchers::WithinAbs(0.0, 1e-14));

  // right-skewed sample
  const std::vector<double> ys = {1, 1, 1, 1, 10};
  CHECK(skewness(ys) > 1.0);
  CHECK_THROWS_AS(mean(std::vector<double>{}), InsufficientDataError);
}

TEST_CASE("linear regression recovers a line") {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(3.0 * i - 7.0);
  }
  const auto fit = linear_regression(x, y);
  CHECK_THAT(fit.slope, Catch::Matchers::WithinRel(3.0, 1e-12));
  CHECK_THAT(fit.intercept, Catch::Matchers::WithinAbs(-7.0, 1e-10));
  CHECK(fit.slope_stderr < 1e-10);
  CHECK_THROWS_AS(linear_regression(std::vector<double>{1, 1},
                                    std::vector<double>{2, 3}),
                  DegenerateDataError);
}
