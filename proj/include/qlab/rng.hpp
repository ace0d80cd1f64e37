#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace qlab {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Chosen over
// std::mt19937 because the output is specified bit-for-bit by (seed, stream,
// counter) alone, independent of platform or call history, which is what the
// run manifests promise. `stream` selects an independent substream, e.g. one
// per simulated qubit.
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        counter_{0, 0, static_cast<std::uint32_t>(stream),
                 static_cast<std::uint32_t>(stream >> 32)} {}

  // One 4x32 block for the given counter; pure function of (key, counter).
  static std::array<std::uint32_t, 4> block(
      std::array<std::uint32_t, 4> ctr,
      std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  std::uint32_t next_u32() noexcept {
    if (buf_pos_ == 4) {
      buf_ = block(counter_, key_);
      if (++counter_[0] == 0 && ++counter_[1] == 0) ++counter_[2];
      buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  // Log-uniform over [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) noexcept {
    return lo * std::exp(uniform() * std::log(hi / lo));
  }

  // Standard normal via Box-Muller; second deviate cached.
  double normal() noexcept {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    // (0,1] to keep the log finite.
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sigma) noexcept {
    return mean + sigma * normal();
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  // Exact binomial as a Bernoulli sum; n stays small here (<= 2^12 shots).
  long binomial(long n, double p) noexcept {
    long k = 0;
    for (long i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace qlab
