#pragma once

#include <cstdint>
#include <random>

namespace asv {

using Rng = std::mt19937_64;

/// Seeded standard-normal source. Owns its engine so independent processes
/// never share a stream.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed = 0) : engine_(seed) {}

  double operator()() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  Rng& engine() { return engine_; }

 private:
  Rng engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer; derives decorrelated child seeds from one master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace asv
