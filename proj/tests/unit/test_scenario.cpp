// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstring>

#include "cfisac/scenario.hpp"
#include "doctest.h"

using namespace cfisac;

namespace {

bool bit_equal(const CMat& a, const CMat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(cd) * a.size()) == 0;
}

}  // namespace

TEST_CASE("steering_vector examples") {
  const CVec a = steering_vector(0.0, 4);
  CHECK((a - CVec::Ones(4)).norm() < 1e-15);
  const CVec e = steering_vector(kPi / 2, 2);
  CHECK(std::abs(e[0] - cd(1, 0)) < 1e-15);
  CHECK(std::abs(e[1] - cd(-1, 0)) < 1e-15);
  const CVec s = steering_vector(kPi / 6, 3);
  CHECK(std::abs(s[1] - cd(0, 1)) < 1e-15);
  CHECK(std::abs(s[2] - cd(-1, 0)) < 1e-15);
  for (int n = 1; n <= 8; ++n) CHECK(steering_vector(0.0, n).isApprox(CVec::Ones(n)));
  CHECK_THROWS_AS(steering_vector(0.1, 0), std::invalid_argument);
}

TEST_CASE("path_loss reference values") {
  const double lambda = kSpeedOfLight / 24e9;
  const double ref = std::pow(lambda / (4 * kPi), 2);
  // Exact constant c = 299792458 gives 9.8816e-7 (-60.05 dB).
  CHECK(path_loss(1.0, 2.2, 24e9) == doctest::Approx(9.8816e-7).epsilon(1e-4));
  CHECK(to_db(path_loss(1.0, 2.2, 24e9)) == doctest::Approx(-60.05).epsilon(1e-4));
  CHECK(to_db(path_loss(30.0, 2.2, 24e9)) == doctest::Approx(-60.0518 - 22 * std::log10(30.0)).epsilon(1e-4));
  CHECK(to_db(path_loss(30.0, 2.2, 24e9)) == doctest::Approx(-92.54).epsilon(1e-3));
  for (double d : {1.0, 7.5, 100.0}) CHECK(path_loss(d, 0.0, 24e9) == doctest::Approx(ref));
  double prev = path_loss(1.0, 2.8, 24e9);
  for (double d = 1.5; d < 500; d *= 1.5) {
    const double g = path_loss(d, 2.8, 24e9);
    CHECK(g < prev);
    prev = g;
  }
  CHECK(path_loss(1.0 + 1e-12, 2.2, 24e9) == doctest::Approx(path_loss(1.0, 2.2, 24e9)));
  CHECK_THROWS_AS(path_loss(0.99, 2.2, 24e9), std::domain_error);
}

TEST_CASE("bistatic_delay_doppler examples") {
  const auto a = bistatic_delay_doppler({0, 30}, {0, 0}, {30, 0}, {30, 0}, 24e9, 2e7);
  CHECK(a.delay == 4);
  CHECK(a.doppler == doctest::Approx(1.2e-4).epsilon(1e-3));
  const auto s = bistatic_delay_doppler({10, 45}, {3, -2}, {30, 0}, {0, 0}, 24e9, 2e7);
  CHECK(s.doppler == 0.0);
  const auto m = bistatic_delay_doppler({30, 0}, {0, 0}, {30, 0}, {30, 0}, 24e9, 2e7);
  CHECK(m.delay == 4);
  CHECK(m.doppler == doctest::Approx(2.4e-4).epsilon(1e-3));

  const auto r = bistatic_delay_doppler({30, 0}, {0, 0}, {0, 30}, {30, 0}, 24e9, 2e7);
  CHECK(r.delay == a.delay);
  CHECK(r.doppler == doctest::Approx(a.doppler).epsilon(1e-12));

  CHECK_THROWS_AS(bistatic_delay_doppler({0, 0}, {0, 0}, {30, 0}, {0, 0}, 24e9, 2e7),
                  std::domain_error);
  // 4e7 m/s is nonsense physically but pins the aliasing guard.
  CHECK_THROWS_AS(bistatic_delay_doppler({0, 30}, {0, 0}, {30, 0}, {4e5, 0}, 24e9, 2e7),
                  std::domain_error);
}

TEST_CASE("rician_channel limits and statistics") {
  Rng rng(3);
  CMat los = CMat::Constant(2, 3, cd(0.6, 0.8));
  const CMat pure = rician_channel(rng, 2, 3, std::numeric_limits<double>::infinity(), los, 4.0);
  CHECK((pure - 2.0 * los).norm() < 1e-14);
  CHECK(rician_channel(rng, 2, 3, 1.0, los, 0.0).norm() == 0.0);

  const int draws = 100000;
  const double gain = 3e-6;
  double acc = 0.0;
  for (int i = 0; i < draws; ++i) acc += rician_channel(rng, 1, 1, 0.0, CMat::Ones(1, 1), gain).squaredNorm();
  CHECK(std::abs(acc / draws / gain - 1.0) < 0.02);

  // E||h||^2 = Nt * gain at the configured K-factor.
  const double k = from_db(3.0);
  acc = 0.0;
  const CVec a = steering_vector(0.3, 4);
  for (int i = 0; i < draws; ++i) acc += rician_channel(rng, 4, 1, k, a, gain).squaredNorm();
  CHECK(std::abs(acc / draws / (4 * gain) - 1.0) < 0.02);

  CHECK_THROWS_AS(rician_channel(rng, 2, 2, -1.0, CMat::Ones(2, 2), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(rician_channel(rng, 2, 2, 1.0, CMat::Ones(2, 3), 1.0), std::invalid_argument);
}

TEST_CASE("SystemConfig validation") {
  SystemConfig c = desk_preset();
  CHECK_NOTHROW(c.validate());
  SystemConfig bad = c;
  bad.num_users = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.power_budget_w.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.sinr_target[0] = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.sampling_hz = 0.5 * bad.bandwidth_hz;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.ring_inner_m = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const SystemConfig f = full_preset();
  CHECK(f.num_tx_aps == 6);
  CHECK(f.num_users == 15);
  CHECK(f.tx_antennas == 4);
  CHECK(f.rx_antennas == 4);
  CHECK(f.block_length == 100);
  CHECK(watt_to_dbm(f.power_budget_w[0]) == doctest::Approx(35.0));
  CHECK(to_db(f.sinr_target[0]) == doctest::Approx(10.0));
}

TEST_CASE("generate_scenario geometry and determinism") {
  const SystemConfig c = full_preset();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Scenario s = generate_scenario(c, seed);
    CHECK(s.target.norm() == 0.0);
    CHECK(s.sensing_ap.isApprox(Vec2(30, 0)));
    REQUIRE(s.num_tx_aps() == 6);
    REQUIRE(s.num_users() == 15);
    for (int b = 0; b < 6; ++b) {
      const double d = s.tx_aps[b].norm();
      CHECK(d >= 30.0);
      CHECK(d <= 60.0);
      // Two-hop path in [60, 90] m at 15 m per sample.
      CHECK(s.target_delay[b] >= 4);
      CHECK(s.target_delay[b] <= 8);
      CHECK(s.direct_delay[b] >= 0);
      CHECK(std::abs(s.doppler[b]) < 0.5);
      const double expected = c.rcs_variance * path_loss(d, 2.2, c.carrier_hz) *
                              path_loss(30.0, 2.2, c.carrier_hz);
      CHECK(s.target_gain_var[b] == doctest::Approx(expected).epsilon(1e-12));
      CHECK(s.clutter_channels[b].rows() == 4);
      CHECK(s.clutter_channels[b].cols() == 4);
    }
    for (const Vec2& u : s.users) CHECK(u.norm() <= 150.0);
  }
  const Scenario a = generate_scenario(c, 11);
  const Scenario b = generate_scenario(c, 11);
  for (int i = 0; i < 6; ++i) {
    CHECK(bit_equal(a.clutter_channels[i], b.clutter_channels[i]));
    for (int k = 0; k < 15; ++k) CHECK(bit_equal(a.user_channels[i][k], b.user_channels[i][k]));
    CHECK(a.tx_aps[i] == b.tx_aps[i]);
  }
  CHECK(a.target_velocity == b.target_velocity);
  const Scenario other = generate_scenario(c, 12);
  CHECK(other.tx_aps[0] != a.tx_aps[0]);
  CHECK(a.target_velocity.norm() == doctest::Approx(c.target_speed));
}

TEST_CASE("user channel power matches the link budget") {
  SystemConfig c = desk_preset();
  c.rician_k_db = 3.0;
  double ratio = 0.0;
  const int draws = 4000;
  for (int s = 0; s < draws; ++s) {
    const Scenario sc = generate_scenario(c, 1000 + s);
    const double d = (sc.tx_aps[0] - sc.users[0]).norm();
    ratio += sc.user_channels[0][0].squaredNorm() / (c.tx_antennas * path_loss(std::max(d, 1.0), 2.8, c.carrier_hz));
  }
  CHECK(std::abs(ratio / draws - 1.0) < 0.05);
}

TEST_CASE("clutter_extra_loss_dB attenuates only the direct links") {
  SystemConfig c = desk_preset();
  const Scenario a = generate_scenario(c, 5);
  c.clutter_extra_loss_db = 10.0;
  const Scenario b = generate_scenario(c, 5);
  for (int i = 0; i < a.num_tx_aps(); ++i) {
    CHECK(b.clutter_channels[i].norm() == doctest::Approx(a.clutter_channels[i].norm() / std::sqrt(10.0)));
    CHECK(bit_equal(a.user_channels[i][0], b.user_channels[i][0]));
    CHECK(a.target_gain_var[i] == b.target_gain_var[i]);
  }
}
