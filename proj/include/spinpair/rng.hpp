#pragma once

#include <cstdint>
#include <cmath>

namespace spinpair {

/// Philox4x32-10 counter-based generator. Chosen over the standard-library
/// engines because the output stream is specified bit-for-bit, which keeps
/// Monte Carlo results reproducible across platforms and compilers. Ensemble
/// member i runs on key (seed ^ i), matching the documented seeding rule.
class Philox {
 public:
  explicit Philox(uint64_t key) : key_lo_(static_cast<uint32_t>(key)), key_hi_(static_cast<uint32_t>(key >> 32)) {}

  Philox(uint64_t seed, uint64_t stream) : Philox(seed ^ stream) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    const uint64_t bits = (static_cast<uint64_t>(next_u32()) << 32) | next_u32();
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  /// Standard normal via the Box-Muller transform (deterministic, no
  /// library distribution involved). Second value of each pair is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  uint32_t next_u32() {
    if (idx_ == 4) {
      block();
      idx_ = 0;
    }
    return out_[idx_++];
  }

 private:
  static constexpr uint32_t kM0 = 0xD2511F53u;
  static constexpr uint32_t kM1 = 0xCD9E8D57u;
  static constexpr uint32_t kW0 = 0x9E3779B9u;
  static constexpr uint32_t kW1 = 0xBB67AE85u;

  static void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    const uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
  }

  void block() {
    uint32_t c0 = static_cast<uint32_t>(counter_);
    uint32_t c1 = static_cast<uint32_t>(counter_ >> 32);
    uint32_t c2 = static_cast<uint32_t>(counter2_);
    uint32_t c3 = static_cast<uint32_t>(counter2_ >> 32);
    uint32_t k0 = key_lo_, k1 = key_hi_;
    for (int round = 0; round < 10; ++round) {
      uint32_t hi0, lo0, hi1, lo1;
      mulhilo(kM0, c0, hi0, lo0);
      mulhilo(kM1, c2, hi1, lo1);
      const uint32_t n0 = hi1 ^ c1 ^ k0;
      const uint32_t n1 = lo1;
      const uint32_t n2 = hi0 ^ c3 ^ k1;
      const uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += kW0;
      k1 += kW1;
    }
    out_[0] = c0;
    out_[1] = c1;
    out_[2] = c2;
    out_[3] = c3;
    if (++counter_ == 0) ++counter2_;
  }

  uint32_t key_lo_, key_hi_;
  uint64_t counter_ = 0, counter2_ = 0;
  uint32_t out_[4] = {0, 0, 0, 0};
  int idx_ = 4;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace spinpair
