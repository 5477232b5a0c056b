// qnoma command-line front end: single runs, omega/bandwidth sweeps, synthetic
// session-data generation, preference-model fitting, and trace replay.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qnoma/config.hpp"
#include "qnoma/errors.hpp"
#include "qnoma/qoe.hpp"
#include "qnoma/sim.hpp"
#include "qnoma/sweep.hpp"
#include "qnoma/trace.hpp"

namespace fs = std::filesystem;
using namespace qnoma;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string mode;
  double omega = -1.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool omega_set = false;
};

config::ConfigMap load_map(const CommonArgs& args) {
  config::ConfigMap map;
  if (!args.config_path.empty()) map = config::ConfigMap::from_file(args.config_path);
  if (args.seed_set) map.set("sim.seed", std::to_string(args.seed));
  if (args.omega_set) map.set("sched.omega", std::to_string(args.omega));
  if (!args.mode.empty()) map.set("sched.mode", args.mode);
  return map;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw SimError("cannot create output directory '" + dir + "': " + ec.message());
}

int cmd_run(const CommonArgs& args) {
  auto map = load_map(args);
  sim::SimConfig cfg = config::load_sim_config(map);
  ensure_out_dir(args.out_dir);

  std::string trace_path = (fs::path(args.out_dir) / "trace.tsv").string();
  std::ofstream trace(trace_path);
  if (!trace) throw SimError("cannot write trace file '" + trace_path + "'");
  sim::RunMetrics metrics = sim::run(cfg, &trace);
  trace.close();

  std::string metrics_path = (fs::path(args.out_dir) / "metrics.txt").string();
  std::ofstream mf(metrics_path);
  if (!mf) throw SimError("cannot write metrics file '" + metrics_path + "'");
  mf << sim::format_metrics(metrics);
  mf.close();

  std::cout << sim::format_metrics(metrics);
  std::cout << "trace: " << trace_path << "\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args, sweep::Variable variable, int seeds_override,
              const std::string& grid_override, int jobs_override) {
  auto map = load_map(args);
  sim::SimConfig base = config::load_sim_config(map);
  config::SweepConfig sc = config::load_sweep_config(map);
  if (seeds_override > 0) sc.n_seeds = seeds_override;
  if (jobs_override >= 0) sc.jobs = jobs_override;

  sweep::SweepSpec spec;
  spec.variable = variable;
  spec.base = base;
  spec.jobs = sc.jobs;
  spec.grid = variable == sweep::Variable::kOmega ? sc.omega_grid : sc.bandwidth_grid_hz;
  if (!grid_override.empty()) {
    spec.grid.clear();
    std::istringstream in(grid_override);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (!item.empty()) spec.grid.push_back(std::stod(item));
    }
  }
  for (int i = 0; i < sc.n_seeds; ++i) {
    spec.seeds.push_back(sc.base_seed + static_cast<std::uint64_t>(i));
  }

  auto rows = sweep::sweep(spec);
  ensure_out_dir(args.out_dir);
  std::string stem = variable == sweep::Variable::kOmega ? "sweep_omega" : "sweep_bw";
  std::string csv_path = (fs::path(args.out_dir) / (stem + ".csv")).string();
  std::string svg_path = (fs::path(args.out_dir) / (stem + ".svg")).string();
  sweep::emit_csv_file(rows, csv_path);
  sweep::emit_chart_file(rows, svg_path);

  int failed = 0;
  for (const auto& r : rows) failed += r.failed ? 1 : 0;
  std::cout << rows.size() << " rows -> " << csv_path << "\n";
  std::cout << "chart -> " << svg_path << "\n";
  if (failed > 0) std::cerr << "warning: " << failed << " rows failed\n";
  return 0;
}

void write_sessions_csv(const qoe::SynthDataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write '" + path + "'");
  out << "user_id,service_id,net_cond,hw_class,context,psnr_deficit,stall_rate,qoe,engagement\n";
  char buf[256];
  const auto& f = d.sessions.factors;
  for (std::size_t r = 0; r < d.sessions.rows(); ++r) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.10g,%d,%d,%.10g,%.10g,%.10g,%d\n",
                  static_cast<int>(f[0].values[r]), static_cast<int>(f[1].values[r]),
                  f[2].values[r], static_cast<int>(f[3].values[r]),
                  static_cast<int>(f[4].values[r]), f[5].values[r], f[6].values[r],
                  f[7].values[r], static_cast<int>(d.sessions.label[r]));
    out << buf;
  }
}

int cmd_gen_data(const CommonArgs& args) {
  auto map = load_map(args);
  config::GenConfig gen = config::load_gen_config(map);
  if (args.seed_set) gen.seed = args.seed;
  ensure_out_dir(args.out_dir);

  Rng rng(gen.seed);
  qoe::SynthDataset d =
      qoe::synth_dataset(rng, gen.n_users, gen.n_services, gen.noise_sigma, gen.observe_rate);

  std::string sessions_path = (fs::path(args.out_dir) / "sessions.csv").string();
  write_sessions_csv(d, sessions_path);

  std::vector<qoe::QoeProfile> truth = d.truth;
  config::save_profiles_csv(truth, (fs::path(args.out_dir) / "truth.csv").string());

  std::cout << d.sessions.rows() << " sessions -> " << sessions_path << "\n";
  return 0;
}

struct LoadedSessions {
  Eigen::MatrixXd qoe_matrix, mask, user_attrs, service_attrs;
  int n_users = 0;
  int n_services = 0;
};

LoadedSessions read_sessions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sessions file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) ||
      line != "user_id,service_id,net_cond,hw_class,context,psnr_deficit,stall_rate,qoe,engagement") {
    throw ConfigError("sessions file '" + path + "': unexpected header");
  }
  struct Row {
    int user, service, hw;
    double deficit, stall, qoe;
  };
  std::vector<Row> rows;
  int max_user = -1, max_service = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream rin(line);
    std::string f[9];
    for (int i = 0; i < 9; ++i) {
      if (!std::getline(rin, f[i], i == 8 ? '\n' : ',')) {
        throw ConfigError("sessions file: bad row '" + line + "'");
      }
    }
    Row r{std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[3]),
          std::stod(f[5]), std::stod(f[6]), std::stod(f[7])};
    max_user = std::max(max_user, r.user);
    max_service = std::max(max_service, r.service);
    rows.push_back(r);
  }
  if (rows.empty()) throw ConfigError("sessions file '" + path + "' has no rows");

  LoadedSessions s;
  s.n_users = max_user + 1;
  s.n_services = max_service + 1;
  s.qoe_matrix = Eigen::MatrixXd::Zero(s.n_users, s.n_services);
  s.mask = Eigen::MatrixXd::Zero(s.n_users, s.n_services);
  s.user_attrs = Eigen::MatrixXd::Zero(s.n_users, 1);
  s.service_attrs = Eigen::MatrixXd::Zero(s.n_services, 2);
  for (const Row& r : rows) {
    s.qoe_matrix(r.user, r.service) = r.qoe;
    s.mask(r.user, r.service) = 1.0;
    s.user_attrs(r.user, 0) = r.hw / 3.0;
    s.service_attrs(r.service, 0) = r.deficit;
    s.service_attrs(r.service, 1) = r.stall;
  }
  return s;
}

void write_model_dump(const qoe::CmfModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write model file '" + path + "'");
  out << "# qnoma-cmf v1\n";
  out << "rank " << m.params.rank << "\n";
  char buf[64];
  auto section = [&](const char* name, const Eigen::MatrixXd& mat) {
    out << name << ' ' << mat.rows() << ' ' << mat.cols() << "\n";
    for (int r = 0; r < mat.rows(); ++r) {
      for (int c = 0; c < mat.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%s%.17g", c ? " " : "", mat(r, c));
        out << buf;
      }
      out << "\n";
    }
  };
  section("U", m.user_factors);
  section("V", m.service_factors);
  section("A", m.user_loadings);
  section("B", m.service_loadings);
  out << "objective_trace " << m.objective_trace.size() << "\n";
  for (double v : m.objective_trace) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out << buf;
  }
}

int cmd_fit_qoe(const CommonArgs& args, const std::string& data_path) {
  auto map = load_map(args);
  qoe::CmfHyperParams params = config::load_cmf_params(map);
  ensure_out_dir(args.out_dir);

  LoadedSessions s = read_sessions_csv(data_path);
  qoe::CmfModel model =
      qoe::cmf_fit(s.qoe_matrix, s.mask, s.user_attrs, s.service_attrs, params);

  std::vector<qoe::QoeProfile> profiles;
  int fallbacks = 0;
  for (int u = 0; u < s.n_users; ++u) {
    qoe::QoeProfile p = qoe::derive_profile(model, u, s.service_attrs);
    fallbacks += p.fallback ? 1 : 0;
    profiles.push_back(p);
  }

  std::string model_path = (fs::path(args.out_dir) / "model.txt").string();
  std::string profiles_path = (fs::path(args.out_dir) / "profiles.csv").string();
  write_model_dump(model, model_path);
  config::save_profiles_csv(profiles, profiles_path);

  std::cout << "fit " << s.n_users << " users x " << s.n_services << " services, "
            << model.objective_trace.size() - 1 << " iterations, objective "
            << model.objective_trace.front() << " -> " << model.objective_trace.back()
            << "\n";
  if (fallbacks > 0) {
    std::cerr << "warning: " << fallbacks << " users fell back to the (0.5, 0.5) profile\n";
  }
  std::cout << "profiles -> " << profiles_path << "\nmodel -> " << model_path << "\n";
  return 0;
}

int cmd_replay(const std::string& trace_path) {
  std::ifstream in(trace_path);
  if (!in) throw ConfigError("cannot open trace file '" + trace_path + "'");
  trace::TraceData data = trace::parse_trace(in);
  sim::RunMetrics metrics = trace::replay_metrics(data);
  std::cout << sim::format_metrics(metrics);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qnoma: downlink NOMA video-streaming simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* cmd, bool with_mode = true) {
    cmd->add_option("--config", args.config_path, "config file (key = value)");
    cmd->add_option("--out-dir", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override sim.seed")->each([&](std::string) {
      args.seed_set = true;
    });
    if (with_mode) {
      cmd->add_option("--mode", args.mode, "scheduler mode (qoe_aware|baseline)");
      cmd->add_option("--omega", args.omega, "override sched.omega")->each([&](std::string) {
        args.omega_set = true;
      });
    }
  };

  auto* run_cmd = app.add_subcommand("run", "single simulated run; writes trace + metrics");
  add_common(run_cmd);

  int seeds_override = 0;
  int jobs_override = -1;
  std::string grid_override;
  auto* sweep_omega = app.add_subcommand("sweep-omega", "omega sweep, both scheduler modes");
  add_common(sweep_omega);
  sweep_omega->add_option("--seeds", seeds_override, "number of seeds");
  sweep_omega->add_option("--grid", grid_override, "comma-separated omega values");
  sweep_omega->add_option("--jobs", jobs_override, "worker threads (0 = auto)");

  auto* sweep_bw = app.add_subcommand("sweep-bw", "bandwidth sweep, both scheduler modes");
  add_common(sweep_bw);
  sweep_bw->add_option("--seeds", seeds_override, "number of seeds");
  sweep_bw->add_option("--grid", grid_override, "comma-separated bandwidths (Hz)");
  sweep_bw->add_option("--jobs", jobs_override, "worker threads (0 = auto)");

  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic session dataset");
  add_common(gen_cmd, /*with_mode=*/false);

  std::string data_path;
  auto* fit_cmd = app.add_subcommand("fit-qoe", "fit the preference model from sessions");
  add_common(fit_cmd, /*with_mode=*/false);
  fit_cmd->add_option("--data", data_path, "sessions.csv from gen-data")->required();

  std::string trace_path;
  auto* replay_cmd = app.add_subcommand("replay", "recompute metrics from a trace file");
  replay_cmd->add_option("--trace", trace_path, "trace.tsv from run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(args);
    if (sweep_omega->parsed()) {
      return cmd_sweep(args, sweep::Variable::kOmega, seeds_override, grid_override,
                       jobs_override);
    }
    if (sweep_bw->parsed()) {
      return cmd_sweep(args, sweep::Variable::kBandwidth, seeds_override, grid_override,
                       jobs_override);
    }
    if (gen_cmd->parsed()) return cmd_gen_data(args);
    if (fit_cmd->parsed()) return cmd_fit_qoe(args, data_path);
    if (replay_cmd->parsed()) return cmd_replay(trace_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
