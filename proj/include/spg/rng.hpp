#pragma once

#include <cmath>
#include <cstdint>

namespace spg {

// Generator identifier stored in trace metadata. The uniform stream is
// splitmix64 over a 64-bit state seeded directly with the run seed; normal
// deviates use Box-Muller on two uniforms, cosine branch only (the sine
// branch is discarded, so every deviate consumes exactly two draws).
inline constexpr const char* kRngId = "splitmix64/box-muller-cos";

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1]; never returns 0 so log() below is safe.
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_gaussian() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in {0, ..., m-1}.
  std::uint64_t next_index(std::uint64_t m) { return next_u64() % m; }

 private:
  std::uint64_t state_;
};

}  // namespace spg
