#pragma once

#include <cstdint>
#include <random>

#include "treedet/types.hpp"

namespace treedet {

// Deterministic random source. The engine is mt19937_64 (output sequence is
// fixed by the standard); distributions are implemented here because the
// stdlib ones are implementation-defined and results must be reproducible
// bit-for-bit from (config, seed) across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Unbiased integer in [0, n) via rejection.
  std::uint64_t below(std::uint64_t n);

  // [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal, Box-Muller with one cached deviate.
  double gaussian();

  // CN(0, var): real/imag parts N(0, var/2) each.
  cplx cgaussian(double var);

  int bit() { return static_cast<int>(gen_() >> 63); }

  // Derives an independent stream seed (splitmix64 finalizer).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace treedet
