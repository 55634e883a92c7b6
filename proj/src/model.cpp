// SPDX-License-Identifier: Apache-2.0
#include "cfisac/model.hpp"

#include <cmath>
#include <stdexcept>

namespace cfisac {

namespace {

template <typename A, typename Bm>
CMat kron(const A& left, const Bm& right) {
  CMat out(left.rows() * right.rows(), left.cols() * right.cols());
  for (Eigen::Index i = 0; i < left.rows(); ++i) {
    for (Eigen::Index j = 0; j < left.cols(); ++j) {
      out.block(i * right.rows(), j * right.cols(), right.rows(), right.cols()) =
          cd(left(i, j)) * right.template cast<cd>();
    }
  }
  return out;
}

Eigen::Map<const CVec> as_vec(const CMat& m) { return {m.data(), m.size()}; }

}  // namespace

SymbolBlock draw_symbols(Rng& rng, int num_users, int tx_antennas, int block_length,
                         int observation_length) {
  if (block_length < 1) throw std::invalid_argument("draw_symbols: L must be >= 1");
  SymbolBlock sb;
  sb.symbols = rng.complex_normal(num_users + tx_antennas, block_length);
  sb.observation_length = observation_length;
  const CMat eye = CMat::Identity(tx_antennas, tx_antennas);
  sb.kron_symbols = kron(sb.symbols.transpose(), eye);
  return sb;
}

int observation_length(const Scenario& scenario, int block_length) {
  return block_length + scenario.max_delay();
}

RMat shift_matrix(int delay, int block_length, int observation_length) {
  if (delay < 0 || delay > observation_length - block_length) {
    throw std::invalid_argument("shift_matrix: delay falls outside the observation window");
  }
  RMat J = RMat::Zero(block_length, observation_length);
  for (int m = 0; m < block_length; ++m) J(m, m + delay) = 1.0;
  return J;
}

Eigen::DiagonalMatrix<cd, Eigen::Dynamic> doppler_matrix(double doppler, int observation_length) {
  if (observation_length < 1) throw std::invalid_argument("doppler_matrix: Q must be >= 1");
  CVec d(observation_length);
  for (int q = 0; q < observation_length; ++q) d[q] = std::polar(1.0, 2.0 * kPi * q * doppler);
  return Eigen::DiagonalMatrix<cd, Eigen::Dynamic>(d);
}

SensingModel build_sensing_model(const Scenario& scenario, const SymbolBlock& symbols) {
  const int B = scenario.num_tx_aps();
  const int nt = scenario.tx_antennas;
  const int L = symbols.block_length();
  const int Q = symbols.observation_length;
  if (symbols.streams() != scenario.num_users() + nt ||
      symbols.kron_symbols.rows() != static_cast<Eigen::Index>(nt) * L ||
      static_cast<int>(scenario.clutter_channels.size()) != B ||
      static_cast<int>(scenario.target_delay.size()) != B) {
    throw std::invalid_argument("build_sensing_model: dimension mismatch");
  }

  SensingModel m;
  m.scenario = scenario;
  m.symbols = symbols;
  const CVec a_r = steering_vector(scenario.target_angle_rx, scenario.rx_antennas);
  for (int b = 0; b < B; ++b) {
    const RMat J_t = shift_matrix(scenario.target_delay[b], L, Q);
    const RMat J_d = shift_matrix(scenario.direct_delay[b], L, Q);
    const auto D = doppler_matrix(scenario.doppler[b], Q);
    const CVec a_t = steering_vector(scenario.target_angle_tx[b], nt);
    const CMat temporal = D * J_t.transpose().cast<cd>();
    m.target_paths.push_back(kron(temporal, CMat(a_r * a_t.transpose())));
    m.clutter_paths.push_back(kron(J_d.transpose(), scenario.clutter_channels[b]));
    m.target_shift.push_back(J_t);
    m.direct_shift.push_back(J_d);
    m.doppler_diag.push_back(D.diagonal());
  }
  return m;
}

BeamformerSet BeamformerSet::zeros(int num_tx_aps, int tx_antennas, int streams) {
  BeamformerSet W;
  W.per_ap.assign(num_tx_aps, CMat::Zero(tx_antennas, streams));
  return W;
}

BeamformerSet BeamformerSet::from_stacked(const CMat& stacked, int num_tx_aps) {
  const Eigen::Index nt = stacked.rows() / num_tx_aps;
  BeamformerSet W;
  for (int b = 0; b < num_tx_aps; ++b) W.per_ap.push_back(stacked.middleRows(b * nt, nt));
  return W;
}

BeamformerSet BeamformerSet::from_vec(const CVec& w, int num_tx_aps, int tx_antennas,
                                      int streams) {
  if (w.size() != static_cast<Eigen::Index>(num_tx_aps) * tx_antennas * streams) {
    throw std::invalid_argument("BeamformerSet::from_vec: length mismatch");
  }
  const CMat stacked = Eigen::Map<const CMat>(w.data(), num_tx_aps * tx_antennas, streams);
  return from_stacked(stacked, num_tx_aps);
}

CMat BeamformerSet::stacked() const {
  const int nt = tx_antennas();
  CMat out(num_tx_aps() * nt, streams());
  for (int b = 0; b < num_tx_aps(); ++b) out.middleRows(b * nt, nt) = per_ap[b];
  return out;
}

CVec BeamformerSet::vec() const {
  const CMat s = stacked();
  return as_vec(s);
}

CVec BeamformerSet::ap_vec(int b) const { return as_vec(per_ap[b]); }

CVec BeamformerSet::user_stack(int j) const { return stacked().col(j); }

RMat ap_selector(int b, int num_tx_aps, int tx_antennas) {
  RMat T = RMat::Zero(tx_antennas, static_cast<Eigen::Index>(num_tx_aps) * tx_antennas);
  T.middleCols(static_cast<Eigen::Index>(b) * tx_antennas, tx_antennas).setIdentity();
  return T;
}

SpaceTimeFilter SpaceTimeFilter::normalized(const CVec& u) {
  const double n = u.norm();
  if (!(n > 0.0)) throw std::invalid_argument("SpaceTimeFilter: zero filter");
  CVec out = u / n;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (std::abs(out[i]) > 1e-12) {
      out *= std::conj(out[i]) / std::abs(out[i]);
      out[i] = std::abs(out[i]);
      break;
    }
  }
  return {out};
}

double comm_sinr(const BeamformerSet& W, const Scenario& scenario, int k) {
  if (k < 0 || k >= scenario.num_users()) throw std::out_of_range("comm_sinr: user index");
  double signal = 0.0;
  double interference = 0.0;
  for (int j = 0; j < W.streams(); ++j) {
    cd s = 0.0;
    for (int b = 0; b < W.num_tx_aps(); ++b) {
      s += (scenario.user_channels[b][k].transpose() * W.per_ap[b].col(j)).value();
    }
    (j == k ? signal : interference) += std::norm(s);
  }
  return signal / (interference + scenario.comm_noise_w);
}

CVec target_response(const SensingModel& model, const BeamformerSet& W, int b) {
  return model.target_paths[b] * (model.symbols.kron_symbols * W.ap_vec(b));
}

CVec clutter_response(const SensingModel& model, const BeamformerSet& W) {
  CVec c = CVec::Zero(model.filter_length());
  for (int b = 0; b < model.num_tx_aps(); ++b) {
    c += model.clutter_paths[b] * (model.symbols.kron_symbols * W.ap_vec(b));
  }
  return c;
}

double radar_sinr(const BeamformerSet& W, const CVec& u, const SensingModel& model) {
  const double uu = u.squaredNorm();
  if (!(uu > 0.0)) throw std::invalid_argument("radar_sinr: zero receive filter");
  double num = 0.0;
  for (int b = 0; b < model.num_tx_aps(); ++b) {
    num += model.scenario.target_gain_var[b] * std::norm(u.dot(target_response(model, W, b)));
  }
  const double den =
      std::norm(u.dot(clutter_response(model, W))) + model.scenario.radar_noise_w * uu;
  return num / den;
}

CMat simulate_received(const Scenario& scenario, const BeamformerSet& W, const SymbolBlock& symbols,
                       const CVec& alpha, const CMat& noise, PathMask mask) {
  const int B = scenario.num_tx_aps();
  const int nr = scenario.rx_antennas;
  const int L = symbols.block_length();
  const int Q = symbols.observation_length;
  const bool with_target = mask == PathMask::All || mask == PathMask::TargetOnly;
  const bool with_clutter = mask == PathMask::All || mask == PathMask::ClutterOnly;
  const bool with_noise = mask == PathMask::All || mask == PathMask::NoiseOnly;

  CMat Y = CMat::Zero(nr, Q);
  const CVec a_r = steering_vector(scenario.target_angle_rx, nr);
  for (int b = 0; b < B; ++b) {
    const CMat X = W.per_ap[b] * symbols.symbols;  // x_b[l], l = 0..L-1
    const CVec a_t = steering_vector(scenario.target_angle_tx[b], scenario.tx_antennas);
    for (int q = 0; q < Q; ++q) {
      const int lt = q - scenario.target_delay[b];
      if (with_target && lt >= 0 && lt < L) {
        const cd beam = a_t.transpose() * X.col(lt);
        Y.col(q) += alpha[b] * beam * std::polar(1.0, 2.0 * kPi * q * scenario.doppler[b]) * a_r;
      }
      const int ld = q - scenario.direct_delay[b];
      if (with_clutter && ld >= 0 && ld < L) {
        Y.col(q) += scenario.clutter_channels[b] * X.col(ld);
      }
    }
  }
  if (with_noise) Y += noise;
  return Y;
}

MonteCarloSinr monte_carlo_radar_sinr(const Scenario& scenario, const BeamformerSet& W,
                                      const CVec& u, const SymbolBlock& symbols, int trials,
                                      Rng& rng) {
  if (trials < 1) throw std::invalid_argument("monte_carlo_radar_sinr: trials must be >= 1");
  const int B = scenario.num_tx_aps();
  const int nr = scenario.rx_antennas;
  const int Q = symbols.observation_length;
  const CMat no_noise = CMat::Zero(nr, Q);
  const CVec no_alpha = CVec::Zero(B);

  MonteCarloSinr est;
  est.trials = trials;
  const double noise_amp = std::sqrt(scenario.radar_noise_w);
  for (int t = 0; t < trials; ++t) {
    CVec alpha(B);
    for (int b = 0; b < B; ++b) {
      alpha[b] = std::sqrt(scenario.target_gain_var[b]) * rng.complex_normal();
    }
    const CMat target =
        simulate_received(scenario, W, symbols, alpha, no_noise, PathMask::TargetOnly);
    const CMat clutter =
        simulate_received(scenario, W, symbols, no_alpha, no_noise, PathMask::ClutterOnly);
    const CMat noise = noise_amp * rng.complex_normal(nr, Q);
    est.target_power += std::norm(u.dot(Eigen::Map<const CVec>(target.data(), target.size())));
    est.clutter_power += std::norm(u.dot(Eigen::Map<const CVec>(clutter.data(), clutter.size())));
    est.noise_power += std::norm(u.dot(Eigen::Map<const CVec>(noise.data(), noise.size())));
  }
  est.target_power /= trials;
  est.clutter_power /= trials;
  est.noise_power /= trials;
  est.sinr = est.target_power / (est.clutter_power + est.noise_power);
  return est;
}

}  // namespace cfisac
