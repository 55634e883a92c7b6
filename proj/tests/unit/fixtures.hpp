// SPDX-License-Identifier: Apache-2.0
//
// Shared builders for small random instances.
#pragma once

#include <cmath>

#include "cfisac/model.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac::testing {

// Small random drop: Nt, Nr in 1..3, L in 1..6, B in 1..3, K in 1..3.
inline SystemConfig small_config(Rng& rng) {
  SystemConfig c = desk_preset();
  c.num_tx_aps = 1 + static_cast<int>(rng.next() % 3);
  c.num_users = 1 + static_cast<int>(rng.next() % 3);
  c.tx_antennas = 1 + static_cast<int>(rng.next() % 3);
  c.rx_antennas = 1 + static_cast<int>(rng.next() % 3);
  c.block_length = 1 + static_cast<int>(rng.next() % 6);
  c.set_uniform_power_dbm(35.0);
  c.set_uniform_sinr_db(0.0);
  return c;
}

inline SensingModel model_for(const SystemConfig& c, std::uint64_t seed) {
  const Scenario sc = generate_scenario(c, derive_seed(seed, 0));
  Rng rng(derive_seed(seed, 1));
  const SymbolBlock sb = draw_symbols(rng, c.num_users, c.tx_antennas, c.block_length,
                                      observation_length(sc, c.block_length));
  return build_sensing_model(sc, sb);
}

inline BeamformerSet random_beamformers(Rng& rng, int B, int nt, int streams, double power = 1.0) {
  BeamformerSet W = BeamformerSet::zeros(B, nt, streams);
  for (auto& Wb : W.per_ap) {
    Wb = rng.complex_normal(nt, streams);
    Wb *= std::sqrt(power) / Wb.norm();
  }
  return W;
}

inline CVec random_vector(Rng& rng, Eigen::Index n) { return rng.complex_normal(n, 1).col(0); }

// Angle between the complex lines spanned by a and b.
inline double line_angle(const CVec& a, const CVec& b) {
  const CVec an = a.normalized();
  const CVec bn = b.normalized();
  const cd p = an.dot(bn);
  return std::atan2((bn - p * an).norm(), std::abs(p));
}

}  // namespace cfisac::testing
