#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace cyldens {

//! Seeded uniform generator with a platform-independent output mapping.
//! Draws are 53-bit mantissa uniforms strictly inside (0, 1), so downstream
//! quantile transforms never see the endpoints.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  //! Uniform draw in the open interval (0, 1).
  double uniform01() {
    const std::uint64_t bits = engine_() >> 11; // top 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return engine_(); }

  //! Identifier recorded in study reports for reproducibility.
  static const char* algorithm_id() { return "mt19937_64/u53"; }

  //! Derive a decorrelated sub-stream seed (splitmix64 finalizer).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::mt19937_64 engine_;
};

} // namespace cyldens
