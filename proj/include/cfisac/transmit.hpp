// SPDX-License-Identifier: Apache-2.0
//
// Transmit-side conic programs over the stacked beamformer w = vec(W).
//
// Variables are the interleaved real lift of x = w / p0 with
// p0 = sqrt(max_b P_b), followed (for the transmit update) by one epigraph
// scalar t. The rescaling keeps the power cones O(1) whatever the budget.
#pragma once

#include "cfisac/cone.hpp"
#include "cfisac/model.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

// Entry (j, b, n) of w, see BeamformerSet.
inline int stacked_index(int j, int b, int n, int num_tx_aps, int tx_antennas) {
  return (j * num_tx_aps + b) * tx_antennas + n;
}

// Scatters per-AP vectors laid out as vec(W_b) into the stacked w layout.
CVec scatter_per_ap(const std::vector<CVec>& per_ap, int tx_antennas, int streams);

struct TransmitProgram {
  cone::ConeProgram program;
  int num_aps = 0;
  int tx_antennas = 0;
  int streams = 0;
  double variable_scale = 1.0;  // p0
  double objective_scale = 1.0;
  bool has_epigraph = false;

  int num_complex() const { return num_aps * tx_antennas * streams; }
  int epigraph_index() const { return 2 * num_complex(); }
  BeamformerSet decode(const RVec& x) const;
};

struct TransmitSocpOptions {
  bool comm_constraints = true;
  // Relative tightening of every SINR target, so that solutions within the
  // solver tolerance still meet the unscaled targets.
  double sinr_margin = 1e-7;
};

// maximize Re{f^H w} - gamma |z^H w|^2 subject to the per-user SINR cones
// (rotated so g_k^T w_k is real), and ||W_b||_F^2 <= P_b per AP.
// Cone order: K user SOCs, K zero cones, B power SOCs, one epigraph SOC.
TransmitProgram assemble_transmit_socp(const CVec& f, const CVec& z, const Scenario& scenario,
                                       const SystemConfig& config, double gamma,
                                       const TransmitSocpOptions& options = {});

// Feasibility program for a common SINR level (zero objective, no epigraph):
// SINR_k >= level for all k under the power budgets.
TransmitProgram assemble_sinr_feasibility(const Scenario& scenario, const SystemConfig& config,
                                          double level);

// Scales down any W_b that exceeds its budget; returns the largest relative
// excess found before clipping.
double clip_to_power_budget(BeamformerSet& W, const SystemConfig& config);

}  // namespace cfisac
