// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cfisac/harness.hpp"
#include "cfisac/numerics.hpp"
#include "cfisac/transmit.hpp"

namespace cfisac {

namespace {

ValidationCheck make_check(std::string name, double measured, double threshold,
                           std::string detail = {}) {
  ValidationCheck c;
  c.name = std::move(name);
  c.measured = measured;
  c.threshold = threshold;
  c.passed = std::isfinite(measured) && measured <= threshold;
  c.detail = std::move(detail);
  return c;
}

// Feasible W when the targets can be met, otherwise a random W at full power.
BeamformerSet test_beamformers(const Scenario& sc, const SystemConfig& config, Rng& rng,
                               bool& from_init) {
  const InitResult init = initialize_beamformers(sc, config);
  from_init = init.feasible;
  if (init.feasible) return init.W;
  BeamformerSet W = BeamformerSet::zeros(sc.num_tx_aps(), sc.tx_antennas, config.streams());
  for (int b = 0; b < sc.num_tx_aps(); ++b) {
    W.per_ap[b] = rng.complex_normal(sc.tx_antennas, config.streams());
    W.per_ap[b] *= std::sqrt(config.power_budget_w[b]) / W.per_ap[b].norm();
  }
  return W;
}

}  // namespace

std::vector<ValidationCheck> validate(const SystemConfig& config, const ValidationOptions& options) {
  config.validate();
  std::vector<ValidationCheck> out;
  const Scenario sc = generate_scenario(config, derive_seed(options.seed, 0));
  Rng sym_rng(derive_seed(options.seed, 1));
  const SymbolBlock symbols = draw_symbols(sym_rng, config.num_users, config.tx_antennas,
                                           config.block_length,
                                           observation_length(sc, config.block_length));
  Scenario modeled = sc;
  if (options.inject_delay_fault) {
    const int room = symbols.observation_length - config.block_length;
    modeled.target_delay[0] += modeled.target_delay[0] < room ? 1 : -1;
  }
  const SensingModel model = build_sensing_model(modeled, symbols);
  Rng rng(derive_seed(options.seed, 2));
  bool from_init = false;
  const BeamformerSet W = test_beamformers(sc, config, rng, from_init);
  const int B = sc.num_tx_aps();

  // Vectorized model against the slot-by-slot simulation, noise-free.
  {
    CVec alpha(B);
    for (int b = 0; b < B; ++b) alpha[b] = std::sqrt(sc.target_gain_var[b]) * rng.complex_normal();
    const CMat zero = CMat::Zero(sc.rx_antennas, symbols.observation_length);
    // Target and clutter separately: the direct path dwarfs the echo.
    auto rel_err = [&](PathMask mask, const CVec& y) {
      const CMat Y = simulate_received(sc, W, symbols, alpha, zero, mask);
      const CVec ys = Eigen::Map<const CVec>(Y.data(), Y.size());
      return (ys - y).norm() / std::max(ys.norm(), 1e-300);
    };
    CVec echo = CVec::Zero(model.filter_length());
    for (int b = 0; b < B; ++b) echo += alpha[b] * target_response(model, W, b);
    const double err = std::max(rel_err(PathMask::TargetOnly, echo),
                                rel_err(PathMask::ClutterOnly, clutter_response(model, W)));
    out.push_back(make_check("kronecker_identity", err, 1e-10,
                             "relative error of the vectorized echo against the sample-wise sum"));
  }

  const SpaceTimeFilter u = update_receive_filter(W, model);

  {
    Rng mc_rng(derive_seed(options.seed, 3));
    const MonteCarloSinr mc =
        monte_carlo_radar_sinr(sc, W, u.weights, symbols, options.monte_carlo_trials, mc_rng);
    const double analytic = radar_sinr(W, u.weights, model);
    const double rel = std::abs(mc.sinr - analytic) / analytic;
    std::ostringstream d;
    d << "analytic " << to_db(analytic) << " dB, empirical " << to_db(mc.sinr) << " dB over "
      << mc.trials << " trials";
    out.push_back(make_check("monte_carlo_sinr", rel, 0.03, d.str()));
  }

  {
    const Surrogate s = surrogate_coefficients(W, u.weights, model);
    double tight = 0.0;
    for (int b = 0; b < B; ++b) {
      const double exact = std::norm(u.weights.dot(target_response(model, W, b)));
      tight = std::max(tight, std::abs(surrogate_value(s, b, W.ap_vec(b)) - exact) /
                                  std::max(exact, 1e-300));
    }
    double worst = 0.0;  // surrogate minus exact, should stay <= 0
    for (int trial = 0; trial < 100; ++trial) {
      BeamformerSet V = W;
      for (int b = 0; b < B; ++b) {
        V.per_ap[b] += (W.per_ap[b].norm() / std::sqrt(double(W.per_ap[b].size()))) *
                       rng.complex_normal(W.per_ap[b].rows(), W.per_ap[b].cols());
        const double exact = std::norm(u.weights.dot(target_response(model, V, b)));
        worst = std::max(worst, (surrogate_value(s, b, V.ap_vec(b)) - exact) /
                                    std::max(exact, s.c_b[b]));
      }
    }
    out.push_back(make_check("surrogate_tight", tight, 1e-9, "relative gap at the anchor"));
    out.push_back(make_check("surrogate_minorizes", worst, 1e-12,
                             "largest relative excess of the surrogate over 100 perturbations"));
  }

  {
    CMat V(model.filter_length(), B);
    for (int b = 0; b < B; ++b) V.col(b) = std::sqrt(sc.target_gain_var[b]) * target_response(model, W, b);
    const CVec c = clutter_response(model, W);
    const double s2 = sc.radar_noise_w;
    const CVec d = principal_generalized_direction(V, c, s2);
    const double quotient = (V.adjoint() * d).squaredNorm() / (std::norm(c.dot(d)) + s2 * d.squaredNorm());
    CMat R = c * c.adjoint();
    R.diagonal().array() += s2;
    const Eigen::LLT<CMat> llt(R);
    const CMat M = llt.matrixL().solve(V);
    const double dense = hermitian_eig(M * M.adjoint()).eigenvalues.maxCoeff();
    out.push_back(make_check("eig_vs_dense", std::abs(quotient - dense) / dense, 1e-8,
                             "reduced generalized eigenproblem against the dense one"));
  }

  {
    const Surrogate s = surrogate_coefficients(W, u.weights, model);
    const CVec z = clutter_direction(u.weights, model);
    const double gamma = radar_sinr(W, u.weights, model);
    TransmitSocpOptions opts;
    opts.comm_constraints = from_init;
    const TransmitProgram tp = assemble_transmit_socp(s.f, z, sc, config, gamma, opts);
    const cone::SolverSettings settings;
    const cone::ConeSolution sol = cone::solve(tp.program, settings);
    const double pres = sol.primal_residual / (1.0 + tp.program.b.norm());
    const double dres = sol.dual_residual / (1.0 + tp.program.c.norm());
    const double gap = std::abs(sol.gap) / (1.0 + std::abs(sol.primal_objective));
    const double worst = sol.status == cone::SolveStatus::Optimal
                             ? std::max({pres / settings.feasibility_tol, dres / settings.feasibility_tol,
                                         gap / settings.gap_tol})
                             : std::numeric_limits<double>::infinity();
    std::ostringstream d;
    d << "status " << cone::to_string(sol.status) << ", " << sol.iterations
      << " iterations; residuals in units of the tolerance";
    out.push_back(make_check("socp_kkt", worst, 1.0, d.str()));
  }

  {
    const CMat V = CMat::Identity(3, 1);
    const CVec c = CVec::Zero(3);
    bool threw = false;
    try {
      (void)principal_generalized_direction(V, c, 0.0);
    } catch (const std::invalid_argument&) {
      threw = true;
    }
    out.push_back(make_check("zero_noise_rejected", threw ? 0.0 : 1.0, 0.0,
                             "sigma_r^2 = 0 must raise instead of dividing by zero"));
  }
  return out;
}

}  // namespace cfisac
