// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "cfisac/linalg.hpp"

namespace cfisac {

// Portable random stream. The engine is the standard mt19937_64; the
// distributions are written out here because the library ones are
// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  // Circularly-symmetric complex normal with unit variance, E|x|^2 = 1.
  cd complex_normal();
  CMat complex_normal(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 finalizer over (base, stream); gives independent per-drop and
// per-purpose seeds from one experiment seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace cfisac
