#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qnoma/errors.hpp"
#include "qnoma/noma.hpp"
#include "qnoma/rng.hpp"

using namespace qnoma;
using namespace qnoma::noma;

TEST_CASE("partitions of two users") {
  auto parts = enumerate_partitions({1, 2}, 2);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0] == Partition{{1}, {2}});
  CHECK(parts[1] == Partition{{1, 2}});
}

TEST_CASE("partitions of three users, pairs at most") {
  auto parts = enumerate_partitions({1, 2, 3}, 2);
  REQUIRE(parts.size() == 4);
  CHECK(parts[0] == Partition{{1}, {2}, {3}});
  CHECK(parts[1] == Partition{{1}, {2, 3}});
  CHECK(parts[2] == Partition{{1, 2}, {3}});
  CHECK(parts[3] == Partition{{1, 3}, {2}});
}

TEST_CASE("partition counts match the brute-force oracle") {
  for (int n = 1; n <= 6; ++n) {
    for (int cap = 1; cap <= 3; ++cap) {
      std::vector<int> ids;
      for (int i = 0; i < n; ++i) ids.push_back(i);
      auto parts = enumerate_partitions(ids, cap);
      CHECK(parts.size() == oracles::count_partitions(n, cap));
    }
  }
  // Pairing four users: 10 partitions.
  CHECK(enumerate_partitions({0, 1, 2, 3}, 2).size() == 10);
}

TEST_CASE("partition list and order match the assignment-vector oracle") {
  for (int n = 2; n <= 5; ++n) {
    std::vector<int> ids;
    for (int i = 0; i < n; ++i) ids.push_back(i);
    for (int cap = 1; cap <= 3; ++cap) {
      auto lib = enumerate_partitions(ids, cap);
      auto ref = oracles::all_partitions(ids, cap);
      REQUIRE(lib.size() == ref.size());
      for (std::size_t i = 0; i < lib.size(); ++i) CHECK(lib[i] == ref[i]);
    }
  }
}

TEST_CASE("partition enumeration guard") {
  std::vector<int> ids;
  for (int i = 0; i < 7; ++i) ids.push_back(i);
  CHECK_THROWS_WITH_AS(enumerate_partitions(ids, 2),
                       doctest::Contains("decision space too large"), SimError);
}

TEST_CASE("power grid shapes") {
  auto single = power_grid(1, 0.05);
  REQUIRE(single.size() == 1);
  CHECK(single[0].fractions == std::vector<double>{1.0});

  auto pairs = power_grid(2, 0.05);
  REQUIRE(pairs.size() == 9);
  CHECK(pairs.front().fractions[1] == doctest::Approx(0.55));
  CHECK(pairs.back().fractions[1] == doctest::Approx(0.95));
  for (const auto& a : pairs) {
    CHECK(a.fractions[0] + a.fractions[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.fractions[1] > a.fractions[0]);  // weaker member gets more power
  }

  auto triples = power_grid(3, 0.05);
  CHECK(!triples.empty());
  for (const auto& a : triples) {
    double sum = a.fractions[0] + a.fractions[1] + a.fractions[2];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(a.fractions[0] < a.fractions[1]);
    CHECK(a.fractions[1] < a.fractions[2]);
  }

  // A coarse step leaves no strictly ordered triple.
  CHECK(power_grid(3, 0.25).empty());
}

TEST_CASE("sic rates, normalized two-user example") {
  // B=1, P=1, N=1, gains (4,1), strong gets 0.2.
  std::vector<double> gains = {4.0, 1.0};
  Cluster c = order_cluster({0, 1}, gains);
  REQUIRE(c.members == std::vector<int>{0, 1});
  PowerAllocation alloc{{0.2, 0.8}};
  auto rates = sic_rates(c, alloc, 1.0, 1.0, 1.0, gains);
  CHECK(rates[0] == doctest::Approx(std::log2(1.8)).epsilon(1e-12));        // 0.848
  CHECK(rates[1] == doctest::Approx(std::log2(1.0 + 0.8 / 1.2)).epsilon(1e-12));  // 0.737
}

TEST_CASE("sic rates degenerate allocation") {
  std::vector<double> gains = {1.0, 1.0};
  Cluster c = order_cluster({0, 1}, gains);
  PowerAllocation all_weak{{0.0, 1.0}};
  auto rates = sic_rates(c, all_weak, 1.0, 1.0, 1.0, gains);
  CHECK(rates[0] == 0.0);
  CHECK(rates[1] == doctest::Approx(1.0).epsilon(1e-12));  // log2(1 + 1/1)
}

TEST_CASE("singleton cluster has no interference") {
  std::vector<double> gains = {3.0};
  Cluster c = order_cluster({0}, gains);
  auto rates = sic_rates(c, {{1.0}}, 2.0, 1.5, 0.5, gains);
  CHECK(rates[0] == doctest::Approx(2.0 * std::log2(1.0 + 1.5 * 3.0 / 0.5)).epsilon(1e-12));
  CHECK(sum_rate_bound(c, 2.0, 1.5, 0.5, gains) == doctest::Approx(rates[0]).epsilon(1e-12));
}

TEST_CASE("sum rate bound dominates the example") {
  std::vector<double> gains = {4.0, 1.0};
  Cluster c = order_cluster({0, 1}, gains);
  double bound = sum_rate_bound(c, 1.0, 1.0, 1.0, gains);
  CHECK(bound == doctest::Approx(std::log2(5.0)).epsilon(1e-12));  // 2.322
  auto rates = sic_rates(c, {{0.2, 0.8}}, 1.0, 1.0, 1.0, gains);
  CHECK(rates[0] + rates[1] <= bound);
}

TEST_CASE("sum of sic rates never exceeds the bound (property sweep)") {
  Rng rng(777);
  for (int trial = 0; trial < 10000; ++trial) {
    std::size_t size = 1 + rng.below(3);
    std::vector<double> gains(size);
    for (auto& g : gains) g = std::pow(10.0, rng.uniform(-13.0, -5.0));
    std::vector<int> block;
    for (std::size_t i = 0; i < size; ++i) block.push_back(static_cast<int>(i));
    Cluster c = order_cluster(block, gains);

    double step = 0.05;
    auto grid = power_grid(size, step);
    double bw = rng.uniform(1e5, 2e7);
    double pw = rng.uniform(0.01, 1.0);
    double noise = std::pow(10.0, rng.uniform(-14.0, -11.0));
    double bound = sum_rate_bound(c, bw, pw, noise, gains);
    for (const auto& alloc : grid) {
      auto rates = sic_rates(c, alloc, bw, pw, noise, gains);
      double sum = 0.0;
      for (double r : rates) sum += r;
      REQUIRE(sum <= bound * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("weak-user rate is monotone in its own power fraction") {
  std::vector<double> gains = {5e-8, 3e-9};
  Cluster c = order_cluster({0, 1}, gains);
  auto grid = power_grid(2, 0.05);  // ordered by ascending weak fraction
  double prev_weak = -1.0, prev_strong = 1e18;
  for (const auto& alloc : grid) {
    auto rates = sic_rates(c, alloc, 1e6, 0.1, 1e-13, gains);
    CHECK(rates[1] >= prev_weak);
    CHECK(rates[0] <= prev_strong);
    prev_weak = rates[1];
    prev_strong = rates[0];
  }
}

TEST_CASE("decode outcome cascade rules") {
  Cluster c;
  c.members = {7, 3};  // 7 strong, 3 weak

  SUBCASE("all realized rates at or above assigned: everyone succeeds") {
    std::vector<double> assigned = {2.0e6, 1.0e6};
    std::vector<std::vector<double>> realized = {{2.0e6, 1.5e6}, {0.0, 1.0e6}};
    auto ok = sic_decode_outcome(c, assigned, realized);
    CHECK(ok == std::vector<bool>{true, true});
  }

  SUBCASE("strong user failing the weak layer fails its own too") {
    std::vector<double> assigned = {2.0e6, 1.0e6};
    // Strong receiver can decode its own layer (2e6 available) but not the
    // weak layer it must cancel first.
    std::vector<std::vector<double>> realized = {{2.5e6, 0.8e6}, {0.0, 1.2e6}};
    auto ok = sic_decode_outcome(c, assigned, realized);
    CHECK(ok == std::vector<bool>{false, true});
  }

  SUBCASE("weak user failing its own layer leaves the strong user intact") {
    std::vector<double> assigned = {2.0e6, 1.0e6};
    std::vector<std::vector<double>> realized = {{2.5e6, 1.5e6}, {0.0, 0.9e6}};
    auto ok = sic_decode_outcome(c, assigned, realized);
    CHECK(ok == std::vector<bool>{true, false});
  }

  SUBCASE("idle layers decode trivially") {
    std::vector<double> assigned = {0.0, 1.0e6};
    std::vector<std::vector<double>> realized = {{0.0, 1.5e6}, {0.0, 1.0e6}};
    auto ok = sic_decode_outcome(c, assigned, realized);
    CHECK(ok == std::vector<bool>{true, true});
  }
}

TEST_CASE("perfect CSI with feasible bitrates decodes everywhere") {
  Rng rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    std::size_t size = 1 + rng.below(3);
    std::vector<double> gains(size);
    for (auto& g : gains) g = std::pow(10.0, rng.uniform(-13.0, -6.0));
    std::vector<int> block;
    for (std::size_t i = 0; i < size; ++i) block.push_back(static_cast<int>(i));
    Cluster c = order_cluster(block, gains);
    auto grid = power_grid(size, 0.1);
    if (grid.empty()) continue;
    const auto& alloc = grid[rng.below(grid.size())];
    double bw = 5e6, pw = 0.1, noise = 1e-13;

    auto scheduled = sic_rates(c, alloc, bw, pw, noise, gains);
    auto realized = sic_layer_rates(c, alloc, bw, pw, noise, gains);
    auto ok = sic_decode_outcome(c, scheduled, realized);
    for (bool b : ok) REQUIRE(b);
  }
}

TEST_CASE("gain ties order clusters by ascending user id") {
  std::vector<double> gains = {1.0, 1.0, 2.0};
  Cluster c = order_cluster({2, 1, 0}, gains);
  CHECK(c.members == std::vector<int>{2, 0, 1});
}

TEST_CASE("noma config validation") {
  NomaConfig bad;
  bad.max_cluster_size = 4;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = NomaConfig{};
  bad.power_grid_step = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = NomaConfig{};
  bad.total_power_w = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
