// SPDX-License-Identifier: Apache-2.0
#include "cfisac/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cfisac {

namespace {

void require(bool condition, const std::string& what) {
  if (!condition) throw std::invalid_argument("SystemConfig: " + what);
}

Vec2 sample_annulus(Rng& rng, double inner, double outer) {
  const double r = std::sqrt(rng.uniform(inner * inner, outer * outer));
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  return {r * std::cos(phi), r * std::sin(phi)};
}

double range_rate(const Vec2& endpoint, const Vec2& target, const Vec2& velocity) {
  const Vec2 d = target - endpoint;
  return d.dot(velocity) / d.norm();
}

cd unit_phase(Rng& rng) { return std::polar(1.0, rng.uniform(0.0, 2.0 * kPi)); }

constexpr int kMaxResample = 10000;

}  // namespace

void SystemConfig::set_uniform_power_dbm(double dbm) {
  power_budget_w.assign(num_tx_aps, dbm_to_watt(dbm));
}

void SystemConfig::set_uniform_sinr_db(double db) { sinr_target.assign(num_users, from_db(db)); }

void SystemConfig::validate() const {
  require(num_tx_aps >= 1 && num_users >= 1, "B and K must be >= 1");
  require(tx_antennas >= 1 && rx_antennas >= 1, "Nt and Nr must be >= 1");
  require(block_length >= 1, "L must be >= 1");
  require(carrier_hz > 0 && bandwidth_hz > 0 && sampling_hz > 0, "frequencies must be > 0");
  require(sampling_hz >= bandwidth_hz, "fs must be >= bandwidth");
  require(comm_noise_w > 0 && radar_noise_w > 0, "noise powers must be > 0");
  require(static_cast<int>(power_budget_w.size()) == num_tx_aps, "length(P_b) must equal B");
  require(static_cast<int>(sinr_target.size()) == num_users, "length(Gamma_k) must equal K");
  for (double p : power_budget_w) require(p > 0, "P_b must be > 0");
  for (double g : sinr_target) require(g > 0, "Gamma_k must be > 0");
  require(rcs_variance > 0, "rcs_var must be > 0");
  require(target_speed >= 0, "target_speed must be >= 0");
  require(sensing_ap_offset_m > 0 && ring_inner_m > 0 && user_radius_m > 0, "radii must be > 0");
  require(ring_outer_m >= ring_inner_m, "ring outer radius must be >= inner radius");
  require(std::isfinite(rician_k_db), "rician_K_dB must be finite");
}

SystemConfig desk_preset() {
  SystemConfig c;
  c.set_uniform_power_dbm(35.0);
  c.set_uniform_sinr_db(0.0);
  return c;
}

SystemConfig full_preset() {
  SystemConfig c;
  c.num_tx_aps = 6;
  c.num_users = 15;
  c.tx_antennas = 4;
  c.rx_antennas = 4;
  c.block_length = 100;
  c.set_uniform_power_dbm(35.0);
  c.set_uniform_sinr_db(10.0);
  return c;
}

int Scenario::max_delay() const {
  int m = 0;
  for (int t : target_delay) m = std::max(m, t);
  for (int t : direct_delay) m = std::max(m, t);
  return m;
}

CVec steering_vector(double theta, int n) {
  if (n < 1) throw std::invalid_argument("steering_vector: n must be >= 1");
  CVec a(n);
  const double s = std::sin(theta);
  for (int m = 0; m < n; ++m) a[m] = std::polar(1.0, kPi * m * s);
  return a;
}

double path_loss(double distance_m, double exponent, double carrier_hz) {
  if (!(distance_m >= 1.0)) {
    throw std::domain_error("path_loss: distance below the 1 m reference");
  }
  const double ref = kSpeedOfLight / carrier_hz / (4.0 * kPi);
  return ref * ref * std::pow(distance_m, -exponent);
}

DelayDoppler bistatic_delay_doppler(const Vec2& tx, const Vec2& target, const Vec2& rx,
                                    const Vec2& velocity, double carrier_hz, double sampling_hz) {
  const double d_tx = (target - tx).norm();
  const double d_rx = (target - rx).norm();
  if (d_tx == 0.0 || d_rx == 0.0) {
    throw std::domain_error("bistatic_delay_doppler: target coincides with an endpoint");
  }
  DelayDoppler out;
  out.delay = static_cast<int>(std::lround(sampling_hz * (d_tx + d_rx) / kSpeedOfLight));
  const double rate = range_rate(tx, target, velocity) + range_rate(rx, target, velocity);
  out.doppler = -rate * carrier_hz / (kSpeedOfLight * sampling_hz);
  if (!(std::abs(out.doppler) < 0.5)) {
    throw std::domain_error("bistatic_delay_doppler: Doppler aliases (|fD| >= 0.5)");
  }
  return out;
}

CMat rician_channel(Rng& rng, int rows, int cols, double k_factor, const CMat& los, double gain) {
  if (los.rows() != rows || los.cols() != cols) {
    throw std::invalid_argument("rician_channel: LoS shape mismatch");
  }
  if (k_factor < 0) throw std::invalid_argument("rician_channel: K-factor must be >= 0");
  const double amp = std::sqrt(gain);
  if (std::isinf(k_factor)) return amp * los;
  const double w_los = std::sqrt(k_factor / (k_factor + 1.0));
  const double w_nlos = std::sqrt(1.0 / (k_factor + 1.0));
  return amp * (w_los * los + w_nlos * rng.complex_normal(rows, cols));
}

double broadside_angle(const Vec2& from, const Vec2& to) {
  const Vec2 d = to - from;
  return std::asin(std::clamp(d.y() / d.norm(), -1.0, 1.0));
}

Scenario generate_scenario(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const int B = config.num_tx_aps;
  const int K = config.num_users;
  const int nt = config.tx_antennas;
  const int nr = config.rx_antennas;

  Scenario sc;
  sc.tx_antennas = nt;
  sc.rx_antennas = nr;
  sc.comm_noise_w = config.comm_noise_w;
  sc.radar_noise_w = config.radar_noise_w;
  sc.target = Vec2(0.0, 0.0);
  sc.sensing_ap = Vec2(config.sensing_ap_offset_m, 0.0);

  for (int b = 0; b < B; ++b) {
    Vec2 p;
    int tries = 0;
    do {
      if (++tries > kMaxResample) throw std::runtime_error("generate_scenario: cannot place AP");
      p = sample_annulus(rng, config.ring_inner_m, config.ring_outer_m);
    } while ((p - sc.sensing_ap).norm() < 1.0 || (p - sc.target).norm() < 1.0);
    sc.tx_aps.push_back(p);
  }
  for (int k = 0; k < K; ++k) {
    Vec2 p;
    int tries = 0;
    bool ok = false;
    while (!ok) {
      if (++tries > kMaxResample) throw std::runtime_error("generate_scenario: cannot place user");
      p = sample_annulus(rng, 0.0, config.user_radius_m);
      ok = std::all_of(sc.tx_aps.begin(), sc.tx_aps.end(),
                       [&](const Vec2& ap) { return (p - ap).norm() >= 1.0; });
    }
    sc.users.push_back(p);
  }

  const double heading = rng.uniform(0.0, 2.0 * kPi);
  sc.target_velocity = config.target_speed * Vec2(std::cos(heading), std::sin(heading));

  const double k_lin = from_db(config.rician_k_db);
  sc.user_channels.assign(B, std::vector<CVec>(K));
  for (int b = 0; b < B; ++b) {
    for (int k = 0; k < K; ++k) {
      const Vec2& ap = sc.tx_aps[b];
      const Vec2& ue = sc.users[k];
      const CMat los = steering_vector(broadside_angle(ap, ue), nt) * unit_phase(rng);
      const double gain = path_loss((ue - ap).norm(), config.comm_pl_exponent, config.carrier_hz);
      sc.user_channels[b][k] = rician_channel(rng, nt, 1, k_lin, los, gain).col(0);
    }
  }

  const double clutter_atten = from_db(-config.clutter_extra_loss_db);
  sc.target_angle_rx = broadside_angle(sc.sensing_ap, sc.target);
  for (int b = 0; b < B; ++b) {
    const Vec2& ap = sc.tx_aps[b];
    const CVec a_rx = steering_vector(broadside_angle(sc.sensing_ap, ap), nr);
    const CVec a_tx = steering_vector(broadside_angle(ap, sc.sensing_ap), nt);
    const CMat los = (a_rx * a_tx.transpose()) * unit_phase(rng);
    const double d_direct = (sc.sensing_ap - ap).norm();
    const double gain =
        path_loss(d_direct, config.sensing_pl_exponent, config.carrier_hz) * clutter_atten;
    sc.clutter_channels.push_back(rician_channel(rng, nr, nt, k_lin, los, gain));

    sc.target_angle_tx.push_back(broadside_angle(ap, sc.target));
    const DelayDoppler dd = bistatic_delay_doppler(ap, sc.target, sc.sensing_ap,
                                                   sc.target_velocity, config.carrier_hz,
                                                   config.sampling_hz);
    sc.target_delay.push_back(dd.delay);
    sc.doppler.push_back(dd.doppler);
    sc.direct_delay.push_back(
        static_cast<int>(std::lround(config.sampling_hz * d_direct / kSpeedOfLight)));

    const double two_hop =
        path_loss((sc.target - ap).norm(), config.sensing_pl_exponent, config.carrier_hz) *
        path_loss((sc.sensing_ap - sc.target).norm(), config.sensing_pl_exponent,
                  config.carrier_hz);
    sc.target_gain_var.push_back(config.rcs_variance * two_hop);
  }
  return sc;
}

}  // namespace cfisac
