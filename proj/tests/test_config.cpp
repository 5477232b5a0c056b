#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qnoma/config.hpp"
#include "qnoma/errors.hpp"

using namespace qnoma;
using namespace qnoma::config;

TEST_CASE("config parsing basics") {
  auto map = ConfigMap::from_string(
      "# comment line\n"
      "sim.n_users = 3\n"
      "sched.omega = 2.5   # trailing comment\n"
      "\n"
      "noma.stale_csi = true\n"
      "video.ladder = 1000000:30, 2000000:35\n");
  CHECK(map.get_int("sim.n_users", 0) == 3);
  CHECK(map.get_double("sched.omega", 0.0) == 2.5);
  CHECK(map.get_bool("noma.stale_csi", false));
  CHECK(map.get_string("video.ladder", "") == "1000000:30, 2000000:35");
  CHECK(map.get_double("cell.radius_m", 500.0) == 500.0);  // default
}

TEST_CASE("config rejects unknown keys and malformed lines") {
  CHECK_THROWS_WITH_AS(ConfigMap::from_string("sim.userz = 4\n"),
                       doctest::Contains("unknown key"), ConfigError);
  CHECK_THROWS_WITH_AS(ConfigMap::from_string("just words\n"),
                       doctest::Contains("expected key = value"), ConfigError);
  CHECK_THROWS_AS(ConfigMap::from_string("sim.n_users = abc\n").get_int("sim.n_users", 0),
                  ConfigError);
  CHECK_THROWS_AS(ConfigMap::from_string("noma.stale_csi = maybe\n")
                      .get_bool("noma.stale_csi", false),
                  ConfigError);
}

TEST_CASE("later assignments win") {
  auto map = ConfigMap::from_string("sched.omega = 1\nsched.omega = 8\n");
  CHECK(map.get_double("sched.omega", 0.0) == 8.0);
}

TEST_CASE("ladder parsing") {
  auto ladder = parse_ladder("800000:32,1500000:36,3000000:40,6000000:44");
  CHECK(ladder.max_level() == 4);
  CHECK(ladder.level(3).bitrate_bps == 3000000.0);
  CHECK(ladder.level(3).psnr_db == 40.0);
  CHECK_THROWS_AS(parse_ladder("800000:32,100:31"), ConfigError);  // bitrate not increasing
  CHECK_THROWS_AS(parse_ladder("garbage"), ConfigError);
}

TEST_CASE("sim config defaults mirror the base scenario") {
  sim::SimConfig cfg = load_sim_config(ConfigMap::from_string(""));
  CHECK(cfg.n_users == 4);
  CHECK(cfg.horizon_slots == 600);
  CHECK(cfg.bandwidth_hz == 10e6);
  CHECK(cfg.noma.total_power_w == doctest::Approx(0.1));  // 20 dBm
  CHECK(cfg.noma.max_cluster_size == 2);
  CHECK(cfg.ladder.max_level() == 4);
  CHECK(cfg.sched.mode == sched::Mode::kQoeAware);
  CHECK(cfg.cell.radius_m == 500.0);
}

TEST_CASE("sim config round trips overrides") {
  auto map = ConfigMap::from_string(
      "sim.n_users = 2\n"
      "sim.horizon_slots = 50\n"
      "sim.bandwidth_hz = 5e6\n"
      "sim.seed = 17\n"
      "noma.total_power_dbm = 23\n"
      "sched.mode = baseline\n"
      "qoe.w_quality = 0.9,0.1\n");
  sim::SimConfig cfg = load_sim_config(map);
  CHECK(cfg.n_users == 2);
  CHECK(cfg.seed == 17);
  CHECK(cfg.noma.total_power_w == doctest::Approx(0.19952623149688797));
  CHECK(cfg.sched.mode == sched::Mode::kBaseline);
  REQUIRE(cfg.profiles.size() == 2);
  CHECK(cfg.profiles[0].w_quality == 0.9);
  CHECK(cfg.profiles[1].w_quality == 0.1);
  CHECK(cfg.profiles[1].w_stall == doctest::Approx(0.9));
}

TEST_CASE("scalar w_quality broadcasts to all users") {
  auto map = ConfigMap::from_string("sim.n_users = 3\nqoe.w_quality = 0.7\n");
  sim::SimConfig cfg = load_sim_config(map);
  REQUIRE(cfg.profiles.size() == 3);
  for (const auto& p : cfg.profiles) CHECK(p.w_quality == 0.7);
}

TEST_CASE("invalid sim configs are rejected") {
  CHECK_THROWS_AS(load_sim_config(ConfigMap::from_string("sim.n_users = 7\n")), ConfigError);
  CHECK_THROWS_AS(load_sim_config(ConfigMap::from_string("sim.n_users = 0\n")), ConfigError);
  CHECK_THROWS_AS(load_sim_config(ConfigMap::from_string("video.slot_s = 0\n")), ConfigError);
  CHECK_THROWS_AS(load_sim_config(ConfigMap::from_string("sched.omega = -2\n")), ConfigError);
  CHECK_THROWS_AS(load_sim_config(ConfigMap::from_string("qoe.w_quality = 0.2,0.3\n")),
                  ConfigError);
  CHECK_THROWS_AS(
      load_sim_config(ConfigMap::from_string("cell.radius_m = 5\ncell.min_distance_m = 10\n")),
      ConfigError);
}

TEST_CASE("profiles csv round trip") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "qnoma_test_profiles.csv";
  std::vector<qoe::QoeProfile> profiles = {{0, 0.25, 0.75, false}, {1, 0.6, 0.4, false}};
  save_profiles_csv(profiles, path.string());
  auto loaded = load_profiles_csv(path.string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].w_quality == doctest::Approx(0.25));
  CHECK(loaded[1].w_stall == doctest::Approx(0.4));
  fs::remove(path);

  CHECK_THROWS_AS(load_profiles_csv("/nonexistent/profiles.csv"), ConfigError);
}

TEST_CASE("sweep and generator configs") {
  auto map = ConfigMap::from_string(
      "sweep.omega_grid = 0,1,2\n"
      "sweep.n_seeds = 5\n"
      "sweep.jobs = 2\n"
      "gen.n_users = 50\n"
      "gen.observe_rate = 0.3\n"
      "cmf.rank = 4\n");
  SweepConfig sc = load_sweep_config(map);
  CHECK(sc.omega_grid == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(sc.n_seeds == 5);
  CHECK(sc.jobs == 2);
  GenConfig gc = load_gen_config(map);
  CHECK(gc.n_users == 50);
  CHECK(gc.observe_rate == 0.3);
  qoe::CmfHyperParams cp = load_cmf_params(map);
  CHECK(cp.rank == 4);

  CHECK_THROWS_AS(load_gen_config(ConfigMap::from_string("gen.observe_rate = 1.5\n")),
                  ConfigError);
  CHECK_THROWS_AS(load_sweep_config(ConfigMap::from_string("sweep.n_seeds = 0\n")),
                  ConfigError);
}
