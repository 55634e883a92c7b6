// SPDX-License-Identifier: Apache-2.0
#include "cfisac/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cfisac/numerics.hpp"
#include "cfisac/transmit.hpp"

namespace cfisac {

namespace {

constexpr double kSinrTol = 1e-6;   // relative, comm constraints
constexpr double kPowerTol = 1e-8;  // relative, power budgets

struct Feasibility {
  bool ok = false;
  BeamformerSet W;
  int iterations = 0;
};

Feasibility check_level(const Scenario& scenario, const SystemConfig& config, double level) {
  const TransmitProgram tp = assemble_sinr_feasibility(scenario, config, level);
  const cone::ConeSolution sol = cone::solve(tp.program);
  Feasibility out;
  out.iterations = sol.iterations;
  if (sol.status != cone::SolveStatus::Optimal) return out;
  out.W = tp.decode(sol.x);
  clip_to_power_budget(out.W, config);
  out.ok = min_comm_sinr(out.W, scenario) >= level * (1.0 - kSinrTol);
  return out;
}

double max_power_violation(const BeamformerSet& W, const SystemConfig& config) {
  double worst = 0.0;
  for (int b = 0; b < W.num_tx_aps(); ++b) {
    worst = std::max(worst, W.power(b) / config.power_budget_w[b] - 1.0);
  }
  return worst;
}

double min_comm_margin(const BeamformerSet& W, const Scenario& scenario,
                       const SystemConfig& config) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < scenario.num_users(); ++k) {
    m = std::min(m, comm_sinr(W, scenario, k) / config.sinr_target[k] - 1.0);
  }
  return m;
}

// Temporal signature r_b of AP b's echo: H_b S~ w_b = r_b ⊗ a_r.
CVec temporal_signature(const SensingModel& model, const BeamformerSet& W, int b) {
  const Scenario& s = model.scenario;
  const CVec a_t = steering_vector(s.target_angle_tx[b], s.tx_antennas);
  const CVec x = (a_t.transpose() * W.per_ap[b] * model.symbols.symbols).transpose();  // L
  const CVec shifted = model.target_shift[b].transpose().cast<cd>() * x;            // Q
  return model.doppler_diag[b].cwiseProduct(shifted);
}

// (t ⊗ I_Nr)^H v for v laid out sample-major.
CVec project_temporal(const CVec& v, const CVec& t, int nr) {
  const Eigen::Map<const CMat> M(v.data(), nr, t.size());
  return M * t.conjugate();
}

SpaceTimeFilter spatial_only_filter(const BeamformerSet& W, const SensingModel& model) {
  const int B = model.num_tx_aps();
  const int nr = model.scenario.rx_antennas;
  int best = 0;
  double best_power = -1.0;
  std::vector<CVec> responses;
  for (int b = 0; b < B; ++b) {
    responses.push_back(target_response(model, W, b));
    const double p = model.scenario.target_gain_var[b] * responses.back().squaredNorm();
    if (p > best_power) {
      best_power = p;
      best = b;
    }
  }
  CVec t = temporal_signature(model, W, best);
  const double tn = t.norm();
  if (!(tn > 0.0)) throw std::invalid_argument("spatial filter: no target response");
  t /= tn;
  CMat V(nr, B);
  for (int b = 0; b < B; ++b) {
    V.col(b) = std::sqrt(model.scenario.target_gain_var[b]) * project_temporal(responses[b], t, nr);
  }
  const CVec c = project_temporal(clutter_response(model, W), t, nr);
  const CVec us = principal_generalized_direction(V, c, model.scenario.radar_noise_w);
  CVec u(t.size() * nr);
  for (Eigen::Index q = 0; q < t.size(); ++q) u.segment(q * nr, nr) = t[q] * us;
  return SpaceTimeFilter::normalized(u);
}

}  // namespace

double min_comm_sinr(const BeamformerSet& W, const Scenario& scenario) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < scenario.num_users(); ++k) m = std::min(m, comm_sinr(W, scenario, k));
  return m;
}

InitResult initialize_beamformers(const Scenario& scenario, const SystemConfig& config,
                                  double width) {
  InitResult out;
  const double target = *std::max_element(config.sinr_target.begin(), config.sinr_target.end());
  Feasibility f = check_level(scenario, config, target);
  ++out.bisection_steps;
  if (!f.ok) return out;
  BeamformerSet best = f.W;

  // Every user's SINR is bounded by all APs beaming at it alone at full power.
  double hi = std::numeric_limits<double>::infinity();
  for (int k = 0; k < scenario.num_users(); ++k) {
    double amp = 0.0;
    for (int b = 0; b < scenario.num_tx_aps(); ++b) {
      amp += std::sqrt(config.power_budget_w[b]) * scenario.user_channels[b][k].norm();
    }
    hi = std::min(hi, amp * amp / scenario.comm_noise_w);
  }
  double lo = std::max(target, min_comm_sinr(best, scenario));
  while (hi - lo >= width) {
    const double mid = 0.5 * (lo + hi);
    f = check_level(scenario, config, mid);
    ++out.bisection_steps;
    if (f.ok) {
      best = std::move(f.W);
      lo = std::max(mid, min_comm_sinr(best, scenario));
    } else {
      hi = mid;
    }
  }
  out.feasible = true;
  out.W = std::move(best);
  out.min_sinr = min_comm_sinr(out.W, scenario);
  return out;
}

SpaceTimeFilter update_receive_filter(const BeamformerSet& W, const SensingModel& model) {
  const int B = model.num_tx_aps();
  CMat V(model.filter_length(), B);
  for (int b = 0; b < B; ++b) {
    V.col(b) = std::sqrt(model.scenario.target_gain_var[b]) * target_response(model, W, b);
  }
  const CVec c = clutter_response(model, W);
  return SpaceTimeFilter::normalized(
      principal_generalized_direction(V, c, model.scenario.radar_noise_w));
}

double update_gamma(const BeamformerSet& W, const CVec& u, const SensingModel& model) {
  return radar_sinr(W, u, model);
}

Surrogate surrogate_coefficients(const BeamformerSet& W_prev, const CVec& u,
                                 const SensingModel& model) {
  Surrogate s;
  const CMat& St = model.symbols.kron_symbols;
  for (int b = 0; b < model.num_tx_aps(); ++b) {
    const CVec rho = St.adjoint() * (model.target_paths[b].adjoint() * u);  // (u^H H_b S~)^H
    const cd beta = rho.dot(W_prev.ap_vec(b));
    s.grad_b.push_back(2.0 * beta * rho);
    s.f_b.push_back(model.scenario.target_gain_var[b] * s.grad_b.back());
    s.c_b.push_back(std::norm(beta));
  }
  s.f = scatter_per_ap(s.f_b, W_prev.tx_antennas(), W_prev.streams());
  return s;
}

double surrogate_value(const Surrogate& s, int b, const CVec& w_b) {
  return s.grad_b[b].dot(w_b).real() - s.c_b[b];
}

CVec clutter_direction(const CVec& u, const SensingModel& model) {
  const CMat& St = model.symbols.kron_symbols;
  std::vector<CVec> per_ap;
  for (int b = 0; b < model.num_tx_aps(); ++b) {
    per_ap.push_back(St.adjoint() * (model.clutter_paths[b].adjoint() * u));
  }
  const int nt = model.scenario.tx_antennas;
  return scatter_per_ap(per_ap, nt, static_cast<int>(St.cols()) / nt);
}

double SolveTrace::max_decrease() const {
  double worst = 0.0;
  double prev = initial_sinr;
  for (const IterationRecord& r : iterations) {
    worst = std::max(worst, prev - r.radar_sinr);
    prev = r.radar_sinr;
  }
  return worst;
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIterations: return "max_iterations";
    case RunStatus::InitInfeasible: return "init_infeasible";
    case RunStatus::SolverFailure: return "solver_failure";
  }
  return "unknown";
}

SpaceTimeFilter receive_filter(ReceiveRule rule, const BeamformerSet& W, const SensingModel& model) {
  switch (rule) {
    case ReceiveRule::Optimal: return update_receive_filter(W, model);
    case ReceiveRule::TargetMatched: {
      CVec u = CVec::Zero(model.filter_length());
      for (int b = 0; b < model.num_tx_aps(); ++b) {
        u += std::sqrt(model.scenario.target_gain_var[b]) * target_response(model, W, b);
      }
      return SpaceTimeFilter::normalized(u);
    }
    case ReceiveRule::SpatialOnly: return spatial_only_filter(W, model);
  }
  throw std::invalid_argument("receive_filter: unknown rule");
}

RunResult run_alternating(const SensingModel& model, const SystemConfig& config,
                          const BeamformerSet& W0, const AlternatingOptions& options) {
  using Clock = std::chrono::steady_clock;
  const Scenario& scenario = model.scenario;
  TransmitSocpOptions socp_opts;
  socp_opts.comm_constraints = options.comm_constraints;

  RunResult out;
  out.status = RunStatus::MaxIterations;
  out.W = W0;
  out.u = receive_filter(options.rule, W0, model);
  double current = radar_sinr(out.W, out.u.weights, model);
  out.trace.initial_sinr = current;

  for (int it = 0; it < options.max_iterations; ++it) {
    const auto start = Clock::now();
    DinkelbachState st;
    st.W_prev = out.W;
    st.gamma = update_gamma(out.W, out.u.weights, model);
    st.surrogate = surrogate_coefficients(out.W, out.u.weights, model);
    st.z = clutter_direction(out.u.weights, model);

    const TransmitProgram tp =
        assemble_transmit_socp(st.surrogate.f, st.z, scenario, config, st.gamma, socp_opts);
    const cone::ConeSolution sol = cone::solve(tp.program, options.solver);
    if (sol.status != cone::SolveStatus::Optimal) {
      out.status = RunStatus::SolverFailure;
      out.message = std::string("transmit SOCP ended with status ") + cone::to_string(sol.status);
      break;
    }
    BeamformerSet W = tp.decode(sol.x);
    clip_to_power_budget(W, config);
    const double margin = min_comm_margin(W, scenario, config);
    if (options.comm_constraints && margin < -kSinrTol) {
      out.status = RunStatus::SolverFailure;
      out.message = "transmit SOCP solution violates a communication constraint";
      break;
    }

    IterationRecord rec;
    rec.gamma = st.gamma;
    rec.dinkelbach_excess = radar_sinr(W, out.u.weights, model) - st.gamma;
    rec.min_comm_margin = margin;
    rec.max_power_violation = max_power_violation(W, config);
    rec.socp_iterations = sol.iterations;
    out.W = std::move(W);
    out.u = receive_filter(options.rule, out.W, model);
    rec.radar_sinr = radar_sinr(out.W, out.u.weights, model);
    rec.radar_sinr_db = to_db(rec.radar_sinr);
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    out.trace.iterations.push_back(rec);

    const double change = std::abs(rec.radar_sinr - current) / std::max(current, 1e-300);
    current = rec.radar_sinr;
    if (change < options.rel_tol) {
      out.status = RunStatus::Converged;
      break;
    }
  }
  out.radar_sinr = radar_sinr(out.W, out.u.weights, model);
  out.min_comm_sinr = min_comm_sinr(out.W, scenario);
  if (out.status == RunStatus::MaxIterations) out.message = "iteration cap reached";
  return out;
}

namespace {

RunResult run_with(const SensingModel& model, const SystemConfig& config, const InitResult& init,
                   ReceiveRule rule, bool comm) {
  if (!init.feasible) {
    RunResult r;
    r.status = RunStatus::InitInfeasible;
    r.message = "communication targets cannot be met under the power budget";
    return r;
  }
  AlternatingOptions opts;
  opts.rule = rule;
  opts.comm_constraints = comm;
  return run_alternating(model, config, init.W, opts);
}

}  // namespace

RunResult run_proposed(const SensingModel& model, const SystemConfig& config,
                       const InitResult& init) {
  return run_with(model, config, init, ReceiveRule::Optimal, true);
}

RunResult baseline_no_rbf(const SensingModel& model, const SystemConfig& config,
                          const InitResult& init) {
  return run_with(model, config, init, ReceiveRule::TargetMatched, true);
}

RunResult baseline_spatial_bf(const SensingModel& model, const SystemConfig& config,
                              const InitResult& init) {
  return run_with(model, config, init, ReceiveRule::SpatialOnly, true);
}

RunResult baseline_radar_only(const SensingModel& model, const SystemConfig& config,
                              const InitResult& init) {
  return run_with(model, config, init, ReceiveRule::Optimal, false);
}

}  // namespace cfisac
