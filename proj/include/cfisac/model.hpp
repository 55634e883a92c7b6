// SPDX-License-Identifier: Apache-2.0
//
// Vectorized sensing model. With y_r = vec(Y_r) (Nr*Q entries, sample-major),
// the echo of AP b is H_b * S~ * w_b and its direct-path clutter is
// C_b * S~ * w_b, where S~ = S^T (x) I_Nt and w_b = vec(W_b).
#pragma once

#include <vector>

#include "cfisac/linalg.hpp"
#include "cfisac/random.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

struct SymbolBlock {
  CMat symbols;             // (K + Nt) x L
  int observation_length = 0;  // Q
  CMat kron_symbols;        // Nt*L x Nt*(K + Nt), S^T (x) I_Nt

  int block_length() const { return static_cast<int>(symbols.cols()); }
  int streams() const { return static_cast<int>(symbols.rows()); }
};

// i.i.d. CN(0,1) symbol block for K users and Nt radar streams.
SymbolBlock draw_symbols(Rng& rng, int num_users, int tx_antennas, int block_length,
                         int observation_length);

// Q = L + max over b of max(tau_b, iota_b).
int observation_length(const Scenario& scenario, int block_length);

// L x Q; entry (m, n) is 1 iff n = m + delay. Throws if delay > Q - L.
RMat shift_matrix(int delay, int block_length, int observation_length);

// diag(1, e^{j2pi fD}, ..., e^{j2pi(Q-1) fD})
Eigen::DiagonalMatrix<cd, Eigen::Dynamic> doppler_matrix(double doppler, int observation_length);

struct SensingModel {
  Scenario scenario;
  SymbolBlock symbols;
  std::vector<CMat> target_paths;   // H_b, Nr*Q x Nt*L
  std::vector<CMat> clutter_paths;  // C_b, Nr*Q x Nt*L
  std::vector<RMat> target_shift;   // J_{tau_b}
  std::vector<RMat> direct_shift;   // J_{iota_b}
  std::vector<CVec> doppler_diag;   // diagonal of D_b

  int num_tx_aps() const { return static_cast<int>(target_paths.size()); }
  int filter_length() const {
    return scenario.rx_antennas * symbols.observation_length;
  }
};

SensingModel build_sensing_model(const Scenario& scenario, const SymbolBlock& symbols);

// Per-AP transmit matrices W_b = [W_c,b  W_r,b], Nt x (K + Nt) each.
//
// Stacked views follow the optimizer's variable layout: W stacks the W_b
// vertically (B*Nt rows) and w = vec(W), so entry (j, b, n) of w sits at
// j*B*Nt + b*Nt + n.
struct BeamformerSet {
  std::vector<CMat> per_ap;

  static BeamformerSet zeros(int num_tx_aps, int tx_antennas, int streams);
  static BeamformerSet from_stacked(const CMat& stacked, int num_tx_aps);
  static BeamformerSet from_vec(const CVec& w, int num_tx_aps, int tx_antennas, int streams);

  int num_tx_aps() const { return static_cast<int>(per_ap.size()); }
  int tx_antennas() const { return static_cast<int>(per_ap.front().rows()); }
  int streams() const { return static_cast<int>(per_ap.front().cols()); }

  CMat stacked() const;
  CVec vec() const;
  CVec ap_vec(int b) const;      // vec(W_b)
  CVec user_stack(int j) const;  // [w_{1,j}; ...; w_{B,j}]
  double power(int b) const { return per_ap[b].squaredNorm(); }
};

// T_b = e_b^T (x) I_Nt, so that T_b * W = W_b.
RMat ap_selector(int b, int num_tx_aps, int tx_antennas);

struct SpaceTimeFilter {
  CVec weights;

  // Unit norm, first element with magnitude > 1e-12 rotated to real >= 0.
  static SpaceTimeFilter normalized(const CVec& u);
};

// SINR of user k per the downlink model; all K + Nt streams except k interfere.
double comm_sinr(const BeamformerSet& W, const Scenario& scenario, int k);

// Target response H_b S~ w_b and summed clutter sum_b C_b S~ w_b.
CVec target_response(const SensingModel& model, const BeamformerSet& W, int b);
CVec clutter_response(const SensingModel& model, const BeamformerSet& W);

// Output SINR of filter u. Throws std::invalid_argument for u = 0.
double radar_sinr(const BeamformerSet& W, const CVec& u, const SensingModel& model);

enum class PathMask { All, TargetOnly, ClutterOnly, NoiseOnly };

// Slot-by-slot received block Y_r (Nr x Q), straight from the per-sample sums;
// never forms the Kronecker matrices. Transmit samples outside 1..L are zero.
CMat simulate_received(const Scenario& scenario, const BeamformerSet& W, const SymbolBlock& symbols,
                       const CVec& alpha, const CMat& noise, PathMask mask = PathMask::All);

struct MonteCarloSinr {
  double target_power = 0.0;   // mean |u^H target part|^2
  double clutter_power = 0.0;  // mean |u^H clutter part|^2
  double noise_power = 0.0;    // mean |u^H noise|^2
  double sinr = 0.0;
  int trials = 0;
};

// Draws alpha_b ~ CN(0, sigma_b^2) and noise per trial, simulates the
// received block, and averages the filtered powers.
MonteCarloSinr monte_carlo_radar_sinr(const Scenario& scenario, const BeamformerSet& W,
                                      const CVec& u, const SymbolBlock& symbols, int trials,
                                      Rng& rng);

}  // namespace cfisac
