#include <doctest.h>

#include <cmath>

#include "qnoma/channel.hpp"
#include "qnoma/errors.hpp"

using namespace qnoma;
using namespace qnoma::channel;

namespace {
const CellGeometry kGeom{500.0, 10.0};
const PathLossConfig kPl{};
}  // namespace

TEST_CASE("path loss reference points") {
  // -30 dB at 1 m.
  CHECK(path_loss(1.0, kPl, 0.5) == doctest::Approx(1e-3).epsilon(1e-12));
  // -30 - 35*2 = -100 dB at 100 m.
  CHECK(path_loss(100.0, kPl, 10.0) == doctest::Approx(1e-10).epsilon(1e-12));
  // -30 - 35 = -65 dB at 10 m.
  CHECK(path_loss(10.0, kPl, 10.0) ==
        doctest::Approx(std::pow(10.0, -6.5)).epsilon(1e-12));
}

TEST_CASE("path loss rejects geometry violations") {
  CHECK_THROWS_WITH_AS(path_loss(5.0, kPl, 10.0),
                       doctest::Contains("geometry violation"), SimError);
}

TEST_CASE("path loss strictly decreasing and positive over the annulus") {
  double prev = path_loss(kGeom.min_distance_m, kPl, kGeom.min_distance_m);
  for (double d = kGeom.min_distance_m + 1.0; d <= kGeom.radius_m; d += 1.0) {
    double g = path_loss(d, kPl, kGeom.min_distance_m);
    CHECK(g > 0.0);
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("noise power") {
  NoiseConfig n;
  // -174 + 9 + 70 = -95 dBm over 10 MHz.
  CHECK(noise_power(10e6, n) ==
        doctest::Approx(std::pow(10.0, -12.5)).epsilon(1e-12));
  NoiseConfig ideal{-174.0, 0.0};
  CHECK(noise_power(1.0, ideal) ==
        doctest::Approx(std::pow(10.0, -20.4)).epsilon(1e-12));
  // Doubling bandwidth adds 3.01 dB.
  double ratio = noise_power(2e6, n) / noise_power(1e6, n);
  CHECK(10.0 * std::log10(ratio) == doctest::Approx(3.0103).epsilon(1e-3));
}

TEST_CASE("fading is exponential with unit mean and non-negative") {
  Rng rng(12345);
  double sum = 0.0;
  const int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    double f = sample_fading(rng);
    REQUIRE(f >= 0.0);
    sum += f;
  }
  double mean = sum / kDraws;
  CHECK(mean > 0.97);
  CHECK(mean < 1.03);
}

TEST_CASE("fading stream is reproducible (golden sequence)") {
  // Frozen once from the implementation; guards the draw transform and the
  // (seed, slot, user) substream derivation against accidental change.
  CHECK(fading_at(1, 0, 0) == doctest::Approx(1.5635720379851969).epsilon(1e-15));
  CHECK(fading_at(1, 0, 1) == doctest::Approx(1.1426573861796279).epsilon(1e-15));
  CHECK(fading_at(1, 1, 0) == doctest::Approx(0.39319865677377019).epsilon(1e-15));
  CHECK(fading_at(42, 7, 3) == doctest::Approx(0.30775072562880151).epsilon(1e-15));
}

TEST_CASE("channel generation is a pure function of (seed, slot, user)") {
  // Same key, any call order: identical draws.
  double a = fading_at(9, 100, 2);
  double b = fading_at(9, 3, 1);
  CHECK(fading_at(9, 100, 2) == a);
  CHECK(fading_at(9, 3, 1) == b);
  // Different keys decorrelate.
  CHECK(fading_at(9, 100, 2) != fading_at(10, 100, 2));
  CHECK(fading_at(9, 100, 2) != fading_at(9, 101, 2));
}

TEST_CASE("zero speed leaves positions unchanged") {
  Rng rng(7);
  auto users = init_users(3, kGeom, 0.0, rng);
  auto before = users;
  advance_mobility(users, kGeom, 1.0, rng);
  for (std::size_t i = 0; i < users.size(); ++i) {
    CHECK(users[i].position.x == before[i].position.x);
    CHECK(users[i].position.y == before[i].position.y);
  }
}

TEST_CASE("waypoint arrival draws a new waypoint deterministically") {
  Rng rng_a(99);
  auto users_a = init_users(1, kGeom, 5.0, rng_a);
  users_a[0].waypoint = users_a[0].position;  // force arrival this step
  advance_mobility(users_a, kGeom, 1.0, rng_a);

  // Replaying the same stream gives the same new waypoint.
  Rng rng_b(99);
  auto users_b = init_users(1, kGeom, 5.0, rng_b);
  users_b[0].waypoint = users_b[0].position;
  advance_mobility(users_b, kGeom, 1.0, rng_b);

  CHECK(users_a[0].waypoint.x == users_b[0].waypoint.x);
  CHECK(users_a[0].waypoint.y == users_b[0].waypoint.y);
  // The new waypoint lands inside the annulus.
  double d = distance_to_origin(users_a[0].waypoint);
  CHECK(d >= kGeom.min_distance_m);
  CHECK(d <= kGeom.radius_m);
}

TEST_CASE("positions stay inside the annulus over many steps") {
  Rng rng(2024);
  auto users = init_users(4, kGeom, 30.0, rng);  // fast, crosses the cell often
  for (int step = 0; step < 100000; ++step) {
    advance_mobility(users, kGeom, 1.0, rng);
    for (const auto& u : users) {
      double d = distance_to_origin(u.position);
      REQUIRE(d >= kGeom.min_distance_m - 1e-9);
      REQUIRE(d <= kGeom.radius_m + 1e-9);
    }
  }
}

TEST_CASE("sample_channel combines path loss and fading") {
  Rng rng(5);
  auto users = init_users(1, kGeom, 1.0, rng);
  ChannelSample s = sample_channel(123, 17, users[0], kPl, kGeom);
  CHECK(s.user_id == 0);
  CHECK(s.slot == 17);
  CHECK(s.gain_lin == s.path_loss_lin * s.fading_lin);
  CHECK(s.fading_lin == fading_at(123, 17, 0));
  CHECK(s.path_loss_lin ==
        path_loss(distance_to_origin(users[0].position), kPl, kGeom.min_distance_m));
}

TEST_CASE("invalid geometry rejected") {
  CellGeometry bad{10.0, 10.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CellGeometry negative{100.0, -1.0};
  CHECK_THROWS_AS(negative.validate(), ConfigError);
}
