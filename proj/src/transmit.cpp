// SPDX-License-Identifier: Apache-2.0
#include "cfisac/transmit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfisac {

using cone::AffineRow;
using cone::ComplexAffine;
using cone::ConeKind;

namespace {

struct Layout {
  int B, nt, J, K;
  int n() const { return B * nt * J; }
  int index(int j, int b, int t) const { return stacked_index(j, b, t, B, nt); }
};

Layout layout_of(const Scenario& s) {
  return {s.num_tx_aps(), s.tx_antennas, s.num_users() + s.tx_antennas, s.num_users()};
}

double variable_scale(const SystemConfig& config) {
  const double pmax = *std::max_element(config.power_budget_w.begin(), config.power_budget_w.end());
  return std::sqrt(pmax);
}

// g_k^T w_j as a form over x = w / p0, scaled by `scale`.
ComplexAffine user_form(const Scenario& s, const Layout& lay, int k, int j, double scale) {
  ComplexAffine form;
  form.coeffs = CVec::Zero(lay.n());
  for (int b = 0; b < lay.B; ++b) {
    for (int t = 0; t < lay.nt; ++t) {
      form.coeffs[lay.index(j, b, t)] = scale * s.user_channels[b][k][t];
    }
  }
  return form;
}

// sqrt(1 + 1/level) Re{g_k^T w_k} >= ||[g_k^T W, sigma_c]||, divided through
// by sigma_c, and Im{g_k^T w_k} = 0.
void add_user_cones(cone::ProgramBuilder& pb, const Scenario& s, const Layout& lay,
                    const std::vector<double>& levels, double p0) {
  const double scale = p0 / std::sqrt(s.comm_noise_w);
  std::vector<AffineRow> imag_rows;
  for (int k = 0; k < lay.K; ++k) {
    std::vector<AffineRow> rows;
    const auto own = cone::complex_affine_to_real(user_form(s, lay, k, k, scale));
    AffineRow head = own[0];
    const double lead = std::sqrt(1.0 + 1.0 / levels[k]);
    for (auto& term : head.terms) term.second *= lead;
    rows.push_back(head);
    for (int j = 0; j < lay.J; ++j) {
      const auto parts = cone::complex_affine_to_real(user_form(s, lay, k, j, scale));
      rows.push_back(parts[0]);
      rows.push_back(parts[1]);
    }
    rows.push_back(AffineRow{{}, 1.0});
    pb.add_cone(ConeKind::SecondOrder, rows);
    imag_rows.push_back(own[1]);
  }
  for (const AffineRow& row : imag_rows) pb.add_cone(ConeKind::Zero, {row});
}

void add_power_cones(cone::ProgramBuilder& pb, const SystemConfig& config, const Layout& lay,
                     double p0) {
  for (int b = 0; b < lay.B; ++b) {
    std::vector<AffineRow> rows;
    rows.push_back(AffineRow{{}, std::sqrt(config.power_budget_w[b]) / p0});
    for (int j = 0; j < lay.J; ++j) {
      for (int t = 0; t < lay.nt; ++t) {
        const int v = lay.index(j, b, t);
        rows.push_back(AffineRow{{{2 * v, 1.0}}, 0.0});
        rows.push_back(AffineRow{{{2 * v + 1, 1.0}}, 0.0});
      }
    }
    pb.add_cone(ConeKind::SecondOrder, rows);
  }
}

void check_inputs(const Scenario& s, const SystemConfig& config) {
  if (static_cast<int>(config.power_budget_w.size()) != s.num_tx_aps()) {
    throw std::invalid_argument("transmit program: one power budget per AP required");
  }
  if (static_cast<int>(config.sinr_target.size()) != s.num_users()) {
    throw std::invalid_argument("transmit program: one SINR target per user required");
  }
}

}  // namespace

CVec scatter_per_ap(const std::vector<CVec>& per_ap, int tx_antennas, int streams) {
  const int B = static_cast<int>(per_ap.size());
  CVec w(static_cast<Eigen::Index>(B) * tx_antennas * streams);
  for (int b = 0; b < B; ++b) {
    for (int j = 0; j < streams; ++j) {
      for (int t = 0; t < tx_antennas; ++t) {
        w[stacked_index(j, b, t, B, tx_antennas)] = per_ap[b][j * tx_antennas + t];
      }
    }
  }
  return w;
}

BeamformerSet TransmitProgram::decode(const RVec& x) const {
  const CVec w = variable_scale * cone::unlift_complex(x, 0, num_complex());
  return BeamformerSet::from_vec(w, num_aps, tx_antennas, streams);
}

TransmitProgram assemble_transmit_socp(const CVec& f, const CVec& z, const Scenario& scenario,
                                       const SystemConfig& config, double gamma,
                                       const TransmitSocpOptions& options) {
  check_inputs(scenario, config);
  if (!(gamma >= 0.0)) throw std::invalid_argument("assemble_transmit_socp: gamma must be >= 0");
  const Layout lay = layout_of(scenario);
  if (f.size() != lay.n() || z.size() != lay.n()) {
    throw std::invalid_argument("assemble_transmit_socp: f and z must match the w layout");
  }
  const double p0 = variable_scale(config);

  TransmitProgram tp;
  tp.num_aps = lay.B;
  tp.tx_antennas = lay.nt;
  tp.streams = lay.J;
  tp.variable_scale = p0;
  tp.has_epigraph = true;

  const double lin = p0 * f.norm();
  const double quad = p0 * p0 * gamma * z.squaredNorm();
  tp.objective_scale = (lin + quad > 0.0 && std::isfinite(lin + quad)) ? 1.0 / (lin + quad) : 1.0;

  cone::ProgramBuilder pb(2 * lay.n() + 1);
  if (options.comm_constraints) {
    std::vector<double> levels(config.sinr_target);
    for (double& g : levels) g *= 1.0 + options.sinr_margin;
    add_user_cones(pb, scenario, lay, levels, p0);
  }
  add_power_cones(pb, config, lay, p0);

  // minimize -s p0 Re{f^H x} + t,  |sqrt(s gamma) p0 z^H x|^2 <= t
  ComplexAffine clutter;
  clutter.coeffs = std::sqrt(tp.objective_scale * gamma) * p0 * z.conjugate();
  pb.add_cone(ConeKind::SecondOrder, cone::quadratic_epigraph_cone(clutter, tp.epigraph_index()));

  RVec c = RVec::Zero(2 * lay.n() + 1);
  c.head(2 * lay.n()) = -tp.objective_scale * p0 * cone::lift_complex(f);
  c[tp.epigraph_index()] = 1.0;
  pb.set_objective(c);
  tp.program = pb.build();
  return tp;
}

TransmitProgram assemble_sinr_feasibility(const Scenario& scenario, const SystemConfig& config,
                                          double level) {
  check_inputs(scenario, config);
  if (!(level > 0.0)) throw std::invalid_argument("assemble_sinr_feasibility: level must be > 0");
  const Layout lay = layout_of(scenario);
  const double p0 = variable_scale(config);
  TransmitProgram tp;
  tp.num_aps = lay.B;
  tp.tx_antennas = lay.nt;
  tp.streams = lay.J;
  tp.variable_scale = p0;
  cone::ProgramBuilder pb(2 * lay.n());
  add_user_cones(pb, scenario, lay, std::vector<double>(lay.K, level), p0);
  add_power_cones(pb, config, lay, p0);
  tp.program = pb.build();
  return tp;
}

double clip_to_power_budget(BeamformerSet& W, const SystemConfig& config) {
  double worst = 0.0;
  for (int b = 0; b < W.num_tx_aps(); ++b) {
    const double p = W.power(b);
    const double budget = config.power_budget_w[b];
    if (p > budget) {
      worst = std::max(worst, p / budget - 1.0);
      W.per_ap[b] *= std::sqrt(budget / p);
    }
  }
  return worst;
}

}  // namespace cfisac
