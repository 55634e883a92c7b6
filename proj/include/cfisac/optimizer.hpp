// SPDX-License-Identifier: Apache-2.0
//
// Alternating transmit/receive design for the radar output SINR:
// exact receive filter for fixed W, then one Dinkelbach-weighted
// minorize-maximize step on W solved as a second-order cone program.
#pragma once

#include <string>
#include <vector>

#include "cfisac/cone.hpp"
#include "cfisac/model.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

struct InitResult {
  bool feasible = false;
  BeamformerSet W;
  double min_sinr = 0.0;  // linear, achieved by W
  int bisection_steps = 0;
};

// Max-min communication SINR under the power budgets by bisection on a
// common SINR level (stops once the bracket is narrower than `width`).
// Infeasible when even max_k Gamma_k cannot be met.
InitResult initialize_beamformers(const Scenario& scenario, const SystemConfig& config,
                                  double width = 1e-3);

// Optimal receive filter for fixed W (principal generalized eigenvector).
// Throws std::invalid_argument if W produces no target response.
SpaceTimeFilter update_receive_filter(const BeamformerSet& W, const SensingModel& model);

double update_gamma(const BeamformerSet& W, const CVec& u, const SensingModel& model);

// Linearization of sum_b sigma_b^2 |u^H H_b S~ w_b|^2 at the anchor W_prev.
struct Surrogate {
  std::vector<CVec> grad_b;  // 2 (u^H H_b S~)^H (u^H H_b S~ w~_b), unweighted
  std::vector<CVec> f_b;     // sigma_b^2 grad_b
  CVec f;                    // f_b scattered into the stacked layout
  std::vector<double> c_b;   // |u^H H_b S~ w~_b|^2
};

Surrogate surrogate_coefficients(const BeamformerSet& W_prev, const CVec& u,
                                 const SensingModel& model);

// Re{grad_b^H w_b} - c_b, a minorizer of |u^H H_b S~ w_b|^2 tight at w~_b.
double surrogate_value(const Surrogate& s, int b, const CVec& w_b);

// zeta with zeta^H w = u^H sum_b C_b S~ w_b, in the stacked layout.
CVec clutter_direction(const CVec& u, const SensingModel& model);

struct DinkelbachState {
  double gamma = 0.0;
  BeamformerSet W_prev;
  Surrogate surrogate;
  CVec z;
};

enum class ReceiveRule {
  Optimal,        // generalized Rayleigh quotient over all of C^{NrQ}
  TargetMatched,  // u ∝ sum_b sigma_b H_b S~ w_b, clutter ignored
  SpatialOnly,    // u = t ⊗ u_s with a fixed temporal template
};

struct AlternatingOptions {
  ReceiveRule rule = ReceiveRule::Optimal;
  bool comm_constraints = true;
  int max_iterations = 100;
  double rel_tol = 1e-4;
  cone::SolverSettings solver;
};

struct IterationRecord {
  double radar_sinr = 0.0;  // linear, after the transmit update
  double radar_sinr_db = 0.0;
  double gamma = 0.0;
  double min_comm_margin = 0.0;  // min_k SINR_k / Gamma_k - 1
  double max_power_violation = 0.0;
  int socp_iterations = 0;
  double wall_ms = 0.0;
  // New SINR at the previous receive filter minus gamma (Dinkelbach check).
  double dinkelbach_excess = 0.0;
};

struct SolveTrace {
  double initial_sinr = 0.0;
  std::vector<IterationRecord> iterations;
  // Largest drop of radar SINR between consecutive iterates (0 if monotone).
  double max_decrease() const;
};

enum class RunStatus { Converged, MaxIterations, InitInfeasible, SolverFailure };

const char* to_string(RunStatus status);

struct RunResult {
  RunStatus status = RunStatus::SolverFailure;
  BeamformerSet W;
  SpaceTimeFilter u;
  SolveTrace trace;
  double radar_sinr = 0.0;     // linear, at (W, u)
  double min_comm_sinr = 0.0;  // linear
  std::string message;

  bool converged() const { return status == RunStatus::Converged; }
};

// Receive filter of the given rule for fixed W.
SpaceTimeFilter receive_filter(ReceiveRule rule, const BeamformerSet& W, const SensingModel& model);

// Alternating loop from a feasible starting W.
RunResult run_alternating(const SensingModel& model, const SystemConfig& config,
                          const BeamformerSet& W0, const AlternatingOptions& options = {});

// Convenience wrappers; `init` is the shared max-min starting point.
RunResult run_proposed(const SensingModel& model, const SystemConfig& config, const InitResult& init);
RunResult baseline_no_rbf(const SensingModel& model, const SystemConfig& config,
                          const InitResult& init);
RunResult baseline_spatial_bf(const SensingModel& model, const SystemConfig& config,
                              const InitResult& init);
RunResult baseline_radar_only(const SensingModel& model, const SystemConfig& config,
                              const InitResult& init);

double min_comm_sinr(const BeamformerSet& W, const Scenario& scenario);

}  // namespace cfisac
