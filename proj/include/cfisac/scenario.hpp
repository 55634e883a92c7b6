// SPDX-License-Identifier: Apache-2.0
//
// System parameters and random drops of the cell-free sensing geometry:
// B transmit APs on a ring around a target at the origin, K users in a disk,
// one dedicated sensing AP. All arrays are half-wavelength ULAs whose
// boresight points along +x (elements laid out along y); angles are measured
// from that boresight, so the target sits at broadside of the sensing AP.
#pragma once

#include <cstdint>
#include <vector>

#include "cfisac/linalg.hpp"
#include "cfisac/random.hpp"

namespace cfisac {

struct SystemConfig {
  int num_tx_aps = 3;
  int num_users = 4;
  int tx_antennas = 2;
  int rx_antennas = 2;
  int block_length = 16;

  double carrier_hz = 24e9;
  double bandwidth_hz = 10e6;
  double sampling_hz = 20e6;
  double comm_noise_w = 1e-11;
  double radar_noise_w = 1e-11;
  double rician_k_db = 3.0;
  double sensing_pl_exponent = 2.2;
  double comm_pl_exponent = 2.8;
  std::vector<double> power_budget_w;  // one per transmit AP
  std::vector<double> sinr_target;     // linear, one per user
  double rcs_variance = 1.0;
  double target_speed = 30.0;

  double sensing_ap_offset_m = 30.0;
  double ring_inner_m = 30.0;
  double ring_outer_m = 60.0;
  double user_radius_m = 150.0;
  // Extra attenuation on the transmit-AP -> sensing-AP links only.
  double clutter_extra_loss_db = 0.0;

  // Number of columns of each W_b: K communication plus Nt radar streams.
  int streams() const { return num_users + tx_antennas; }
  void set_uniform_power_dbm(double dbm);
  void set_uniform_sinr_db(double db);
  // Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

// B=3, K=4, Nt=Nr=2, L=16 at P=35 dBm, Gamma=0 dB. With only six transmit
// antennas a 10 dB target is out of reach for most drops at this link budget.
SystemConfig desk_preset();
// B=6, K=15, Nt=Nr=4, L=100 at P=35 dBm, Gamma=10 dB.
SystemConfig full_preset();

struct Scenario {
  int tx_antennas = 0;
  int rx_antennas = 0;
  double comm_noise_w = 0.0;
  double radar_noise_w = 0.0;

  Vec2 target{0.0, 0.0};
  Vec2 target_velocity{0.0, 0.0};
  Vec2 sensing_ap{0.0, 0.0};
  std::vector<Vec2> tx_aps;
  std::vector<Vec2> users;

  std::vector<std::vector<CVec>> user_channels;  // [b][k], Nt entries
  std::vector<CMat> clutter_channels;            // [b], Nr x Nt

  double target_angle_rx = 0.0;            // at the sensing AP
  std::vector<double> target_angle_tx;     // [b]
  std::vector<int> target_delay;           // [b], samples, tx -> target -> rx
  std::vector<int> direct_delay;           // [b], samples, tx -> rx
  std::vector<double> doppler;             // [b], cycles per sample
  std::vector<double> target_gain_var;     // [b], variance of the path gain

  int num_tx_aps() const { return static_cast<int>(tx_aps.size()); }
  int num_users() const { return static_cast<int>(users.size()); }
  int max_delay() const;
};

// exp(j*pi*m*sin(theta)), m = 0..n-1.
CVec steering_vector(double theta, int n);

// Free-space gain (lambda / 4 pi)^2 at the 1 m reference, then d^-exponent.
// Throws std::domain_error below the reference distance.
double path_loss(double distance_m, double exponent, double carrier_hz);

struct DelayDoppler {
  int delay = 0;         // samples
  double doppler = 0.0;  // cycles per sample
};

// Two-hop delay rounded to the nearest sample, and the Doppler of a target
// moving with `velocity`. Throws std::domain_error when |doppler| >= 0.5 or
// the target coincides with an endpoint.
DelayDoppler bistatic_delay_doppler(const Vec2& tx, const Vec2& target, const Vec2& rx,
                                    const Vec2& velocity, double carrier_hz, double sampling_hz);

// sqrt(gain) * (sqrt(K/(K+1)) * los + sqrt(1/(K+1)) * N), N ~ CN(0, 1) i.i.d.
// An infinite K gives the pure line-of-sight matrix and draws nothing.
CMat rician_channel(Rng& rng, int rows, int cols, double k_factor, const CMat& los, double gain);

// Angle of `to` seen from an array at `from`, relative to its x-axis boresight.
double broadside_angle(const Vec2& from, const Vec2& to);

Scenario generate_scenario(const SystemConfig& config, std::uint64_t seed);

}  // namespace cfisac
