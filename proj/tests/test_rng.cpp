#include <catch2/catch_amalgamated.hpp>

#include "qlab/rng.hpp"

using qlab::Philox;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // kat_vectors from the Random123 distribution
  const auto zeros = Philox::block({0, 0, 0, 0}, {0, 0});
  CHECK(zeros[0] == 0x6627e8d5u);
  CHECK(zeros[1] == 0xe169c58du);
  CHECK(zeros[2] == 0xbc57ac4cu);
  CHECK(zeros[3] == 0x9b00dbd8u);

  const auto ones = Philox::block({0xffffffffu, 0xffffffffu, 0xffffffffu,
                                   0xffffffffu},
                                  {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);

  const auto pi = Philox::block(
      {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
      {0xa4093822u, 0x299f31d0u});
  CHECK(pi[0] == 0xd16cfe09u);
  CHECK(pi[1] == 0x94fdccebu);
  CHECK(pi[2] == 0x5001e420u);
  CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("philox streams are deterministic and independent") {
  Philox a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
  }
}

TEST_CASE("uniform and normal have sane moments") {
  Philox rng(7);
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    su2 += u * u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK_THAT(su / n, Catch::Matchers::WithinAbs(0.5, 0.005));
  CHECK_THAT(su2 / n - 0.25, Catch::Matchers::WithinAbs(1.0 / 12.0, 0.005));
  CHECK_THAT(sn / n, Catch::Matchers::WithinAbs(0.0, 0.01));
  CHECK_THAT(sn2 / n, Catch::Matchers::WithinAbs(1.0, 0.02));
}

TEST_CASE("binomial matches expectation") {
  Philox rng(11);
  const long n = 4096;
  const double p = 0.25;
  double total = 0;
  const int reps = 200;
  for (int i = 0; i < reps; ++i) total += static_cast<double>(rng.binomial(n, p));
  const double mean = total / reps;
  // SE of the mean of 200 binomial draws
  const double se = std::sqrt(n * p * (1 - p) / reps);
  CHECK(std::fabs(mean - n * p) < 4 * se);
}

TEST_CASE("log_uniform stays inside its range") {
  Philox rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double g = rng.log_uniform(10.0, 1000.0);
    REQUIRE(g >= 10.0);
    REQUIRE(g <= 1000.0);
  }
}
