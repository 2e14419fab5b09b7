#pragma once

#include <cmath>
#include <cstdint>

namespace dppa {

// Counter-based pseudorandom stream: output k is splitmix64(key + k*phi),
// where the key is derived by hashing (seed, stream). Streams with
// different ids are independent and can be split without coordination,
// and every draw is a pure function of (seed, stream, counter), so
// results are identical across platforms and runs.
//
// Normal deviates use the Box-Muller cosine branch: two uniforms per
// draw, no cached spare.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(derive_key(seed, stream)) {}

  std::uint64_t next_u64() { return finalize(key_ + (++counter_) * kPhi); }

  // Uniform on [0, 1) with 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_gaussian() {
    const double u1 = 1.0 - next_unit();  // (0, 1], keeps the log finite
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  static constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ull;
  static constexpr double kTwoPi = 6.283185307179586476925286766559;

  // splitmix64 finalizer
  static std::uint64_t finalize(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return finalize(finalize(seed + kPhi) ^ finalize(stream + 0xD1B54A32D192ED03ull));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dppa
