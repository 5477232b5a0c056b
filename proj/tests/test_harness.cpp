#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "qnoma/config.hpp"
#include "qnoma/errors.hpp"
#include "qnoma/sim.hpp"
#include "qnoma/sweep.hpp"
#include "qnoma/trace.hpp"

using namespace qnoma;

namespace {

sim::SimConfig small_config(std::uint64_t seed = 7, int users = 2, int slots = 40) {
  sim::SimConfig cfg;
  cfg.n_users = users;
  cfg.horizon_slots = slots;
  cfg.video_length_s = slots;
  cfg.seed = seed;
  return cfg;
}

std::string run_to_string(const sim::SimConfig& cfg, sim::RunMetrics* metrics = nullptr) {
  std::ostringstream trace;
  sim::RunMetrics m = sim::run(cfg, &trace);
  if (metrics) *metrics = m;
  return trace.str();
}

}  // namespace

TEST_CASE("empty horizon produces an empty trace and no playback") {
  sim::SimConfig cfg = small_config(1, 2, 0);
  sim::RunMetrics m;
  std::string trace = run_to_string(cfg, &m);
  CHECK(trace.find("\nS\t") == std::string::npos);
  REQUIRE(m.users.size() == 2);
  for (const auto& u : m.users) {
    CHECK_FALSE(u.mean_psnr_db);
    CHECK_FALSE(u.join_time_slots);
    CHECK(u.stall_count == 0);
  }
  CHECK_FALSE(m.mean_psnr_db);
  CHECK(m.mean_objective == 0.0);
}

TEST_CASE("base four-user scenario runs to completion in both modes") {
  for (auto mode : {sched::Mode::kQoeAware, sched::Mode::kBaseline}) {
    sim::SimConfig cfg;  // defaults: 4 users, 20 dBm, 600 slots
    cfg.horizon_slots = 120;
    cfg.video_length_s = 120;
    cfg.sched.mode = mode;
    sim::RunMetrics m = sim::run(cfg);
    REQUIRE(m.users.size() == 4);
    // Someone must have been served in two minutes of slots.
    CHECK(m.mean_psnr_db);
    CHECK(m.mean_rate_bps > 0.0);
  }
}

TEST_CASE("identical config and seed give byte-identical traces") {
  sim::SimConfig cfg = small_config(99, 3, 60);
  std::string a = run_to_string(cfg);
  std::string b = run_to_string(cfg);
  CHECK(a == b);

  sim::SimConfig other = cfg;
  other.seed = 100;
  CHECK(run_to_string(other) != a);
}

TEST_CASE("golden trace stays stable") {
  sim::SimConfig cfg = small_config(7, 2, 6);
  std::string trace = run_to_string(cfg);
  std::ifstream gold(QNOMA_TEST_DATA_DIR "/golden_trace.tsv");
  REQUIRE_MESSAGE(gold.good(), "golden trace file missing");
  std::ostringstream want;
  want << gold.rdbuf();
  CHECK(trace == want.str());
}

TEST_CASE("replay reproduces run metrics exactly") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    sim::SimConfig cfg = small_config(seed, 3, 80);
    cfg.sched.omega = seed == 2 ? 0.0 : 8.0;
    sim::RunMetrics direct;
    std::string trace = run_to_string(cfg, &direct);
    std::istringstream in(trace);
    trace::TraceData data = trace::parse_trace(in);
    sim::RunMetrics replayed = trace::replay_metrics(data);
    REQUIRE(replayed == direct);
  }
}

TEST_CASE("conservation holds per user in a full run") {
  sim::SimConfig cfg = small_config(5, 4, 100);
  sim::RunMetrics m = sim::run(cfg);
  for (const auto& u : m.users) {
    CHECK(u.delivered_total_s ==
          doctest::Approx(u.played_total_s + u.final_buffer_s).epsilon(1e-12));
  }
}

TEST_CASE("stale CSI mode can fail decodes but still conserves content") {
  sim::SimConfig cfg = small_config(11, 3, 120);
  cfg.noma.stale_csi = true;
  cfg.mobility_speed_mps = 20.0;  // fast channel changes
  sim::RunMetrics m = sim::run(cfg);
  for (const auto& u : m.users) {
    CHECK(u.delivered_total_s ==
          doctest::Approx(u.played_total_s + u.final_buffer_s).epsilon(1e-12));
  }
  // Stale CSI cannot deliver more than fresh CSI on the same seed.
  sim::SimConfig fresh = cfg;
  fresh.noma.stale_csi = false;
  sim::RunMetrics mf = sim::run(fresh);
  double stale_total = 0.0, fresh_total = 0.0;
  for (std::size_t u = 0; u < m.users.size(); ++u) {
    stale_total += m.users[u].delivered_total_s;
    fresh_total += mf.users[u].delivered_total_s;
  }
  CHECK(stale_total <= fresh_total + 1e-9);
}

TEST_CASE("degenerate sweep equals a single run") {
  sweep::SweepSpec spec;
  spec.variable = sweep::Variable::kOmega;
  spec.grid = {4.0};
  spec.seeds = {21};
  spec.base = small_config(21, 2, 50);
  auto rows = sweep::sweep(spec);
  REQUIRE(rows.size() == 2);  // one per mode

  sim::SimConfig aware = spec.base;
  aware.seed = 21;
  aware.sched.mode = sched::Mode::kQoeAware;
  aware.sched.omega = 4.0;
  sim::RunMetrics m = sim::run(aware);
  const sweep::SweepRow* aware_row = &rows[0];
  if (aware_row->mode != "qoe_aware") aware_row = &rows[1];
  CHECK(aware_row->mean_psnr_db == m.mean_psnr_db);
  CHECK(aware_row->stall_count == m.stall_count_total);
  CHECK(aware_row->mean_rate_bps == m.mean_rate_bps);
}

TEST_CASE("omega sweep replicates baseline rows across the grid") {
  sweep::SweepSpec spec;
  spec.variable = sweep::Variable::kOmega;
  spec.grid = {0.0, 2.0};
  spec.seeds = {5, 6};
  spec.base = small_config(0, 2, 40);
  auto rows = sweep::sweep(spec);
  REQUIRE(rows.size() == 8);  // 2 grid x 2 seeds x 2 modes

  // Sorted by (value, seed, mode); baseline sorts before qoe_aware.
  CHECK(rows[0].value == 0.0);
  CHECK(rows[0].mode == "baseline");
  CHECK(rows[1].mode == "qoe_aware");
  CHECK(rows[0].seed == 5);
  CHECK(rows[2].seed == 6);

  // Baseline metrics for a seed are identical at every omega.
  auto find_baseline = [&](double value, std::uint64_t seed) {
    for (const auto& r : rows) {
      if (r.mode == "baseline" && r.value == value && r.seed == seed) return r;
    }
    FAIL("row not found");
    return rows[0];
  };
  for (std::uint64_t seed : {5ull, 6ull}) {
    auto a = find_baseline(0.0, seed);
    auto b = find_baseline(2.0, seed);
    CHECK(a.mean_psnr_db == b.mean_psnr_db);
    CHECK(a.stall_count == b.stall_count);
    CHECK(a.mean_rate_bps == b.mean_rate_bps);
  }
}

TEST_CASE("parallel sweep output is identical to sequential") {
  sweep::SweepSpec spec;
  spec.variable = sweep::Variable::kBandwidth;
  spec.grid = {5e6, 10e6};
  spec.seeds = {1, 2, 3};
  spec.base = small_config(0, 2, 30);
  spec.jobs = 1;
  auto sequential = sweep::sweep(spec);
  spec.jobs = 4;
  auto parallel = sweep::sweep(spec);
  REQUIRE(sequential.size() == parallel.size());
  std::ostringstream a, b;
  sweep::emit_csv(sequential, a);
  sweep::emit_csv(parallel, b);
  CHECK(a.str() == b.str());
}

TEST_CASE("failed runs are marked and the sweep continues") {
  sweep::SweepSpec spec;
  spec.variable = sweep::Variable::kOmega;
  spec.grid = {1.0};
  spec.seeds = {1};
  spec.base = small_config(1, 4, 10);
  spec.base.sched.decision_space_limit = 2;  // every run trips the guard
  auto rows = sweep::sweep(spec);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].failed);
  CHECK(rows[1].failed);
  std::ostringstream out;
  sweep::emit_csv(rows, out);
  CHECK(out.str().find("nan,nan,nan,nan") != std::string::npos);
}

TEST_CASE("csv header is exact and the table round-trips") {
  sweep::SweepSpec spec;
  spec.variable = sweep::Variable::kOmega;
  spec.grid = {0.0, 1.0};
  spec.seeds = {9};
  spec.base = small_config(9, 2, 30);
  auto rows = sweep::sweep(spec);

  std::ostringstream out;
  sweep::emit_csv(rows, out);
  std::string text = out.str();
  CHECK(text.substr(0, text.find('\n')) ==
        "variable,value,seed,mode,mean_psnr_db,stall_count,join_time_slots,mean_rate_bps");

  std::istringstream in(text);
  auto parsed = sweep::parse_csv(in);
  REQUIRE(parsed.size() == rows.size());
  std::ostringstream out2;
  sweep::emit_csv(parsed, out2);
  CHECK(out2.str() == text);

  std::istringstream bad("wrong,header\n");
  CHECK_THROWS_AS(sweep::parse_csv(bad), ConfigError);
}

TEST_CASE("chart has exactly one series per mode per panel") {
  sweep::SweepSpec spec;
  spec.variable = sweep::Variable::kOmega;
  spec.grid = {0.0, 1.0, 2.0};
  spec.seeds = {3, 4};
  spec.base = small_config(3, 2, 30);
  auto rows = sweep::sweep(spec);

  std::ostringstream out;
  sweep::emit_chart(rows, out);
  std::string svg = out.str();
  REQUIRE(svg.find("<svg") != std::string::npos);

  auto count_in = [&](const std::string& start, const std::string& end,
                      const std::string& needle) {
    std::size_t begin = svg.find(start);
    std::size_t stop = svg.find(end, begin);
    REQUIRE(begin != std::string::npos);
    REQUIRE(stop != std::string::npos);
    int count = 0;
    for (std::size_t pos = svg.find(needle, begin);
         pos != std::string::npos && pos < stop; pos = svg.find(needle, pos + 1)) {
      ++count;
    }
    return count;
  };
  CHECK(count_in("<g id=\"panel-psnr\">", "</g>", "class=\"series\"") == 2);
  CHECK(count_in("<g id=\"panel-stalls\">", "</g>", "class=\"series\"") == 2);

  CHECK_THROWS_AS(sweep::emit_chart({}, out), ConfigError);
}

TEST_CASE("trace parser rejects garbage") {
  std::istringstream missing_header("S\t0\t1.0\tplan\n");
  CHECK_THROWS_AS(trace::parse_trace(missing_header), ConfigError);
  std::istringstream bad_record("# qnoma-trace v1\n# n_users 1\nX\t0\n");
  CHECK_THROWS_AS(trace::parse_trace(bad_record), ConfigError);
}

TEST_CASE("video shorter than the horizon drains cleanly") {
  sim::SimConfig cfg = small_config(13, 2, 80);
  cfg.video_length_s = 30.0;
  sim::RunMetrics m = sim::run(cfg);
  for (const auto& u : m.users) {
    CHECK(u.delivered_total_s <= 30.0 + 1e-9);
    CHECK(u.delivered_total_s ==
          doctest::Approx(u.played_total_s + u.final_buffer_s).epsilon(1e-12));
    // A drained stream must not rack up stalls for the rest of the horizon.
    CHECK(u.stall_count < 40);
  }
}
