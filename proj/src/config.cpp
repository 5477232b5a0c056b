#include "qnoma/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qnoma/errors.hpp"

namespace qnoma::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "cell.radius_m", "cell.min_distance_m",
      "channel.pl0_db", "channel.eta",
      "noise.psd_dbm_hz", "noise.nf_db",
      "mobility.speed_mps",
      "noma.total_power_dbm", "noma.max_cluster_size", "noma.power_grid_step",
      "noma.stale_csi",
      "video.ladder", "video.slot_s", "video.startup_threshold_s", "video.length_s",
      "sched.mode", "sched.omega", "sched.decision_space_limit",
      "sim.n_users", "sim.horizon_slots", "sim.bandwidth_hz", "sim.seed",
      "qoe.w_quality", "qoe.profiles_file",
      "gen.n_users", "gen.n_services", "gen.noise_sigma", "gen.observe_rate", "gen.seed",
      "cmf.rank", "cmf.beta_y", "cmf.beta_u", "cmf.beta_s", "cmf.lambda",
      "cmf.max_iterations", "cmf.tolerance", "cmf.seed",
      "sweep.omega_grid", "sweep.bandwidth_grid_hz", "sweep.n_seeds",
      "sweep.base_seed", "sweep.jobs",
  };
  return keys;
}

}  // namespace

ConfigMap ConfigMap::from_string(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    if (!known_keys().count(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    map.kv_[key] = value;
  }
  return map;
}

ConfigMap ConfigMap::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

bool ConfigMap::has(const std::string& key) const { return kv_.count(key) > 0; }

void ConfigMap::set(const std::string& key, const std::string& value) {
  if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  kv_[key] = value;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double ConfigMap::get_double(const std::string& key, double def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + it->second + "'");
  }
}

std::int64_t ConfigMap::get_int(const std::string& key, std::int64_t def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    std::size_t pos = 0;
    long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: '" + it->second + "'");
  }
}

std::uint64_t ConfigMap::get_uint(const std::string& key, std::uint64_t def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an unsigned integer: '" + it->second + "'");
  }
}

bool ConfigMap::get_bool(const std::string& key, bool def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> ConfigMap::get_double_list(const std::string& key,
                                               const std::vector<double>& def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<double> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': bad list element '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

video::QualityLadder parse_ladder(const std::string& text) {
  video::QualityLadder ladder;
  std::istringstream in(text);
  std::string item;
  int id = 1;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("video.ladder: expected bitrate:psnr pairs, got '" + item + "'");
    }
    try {
      double bitrate = std::stod(item.substr(0, colon));
      double psnr = std::stod(item.substr(colon + 1));
      ladder.levels.push_back({id++, bitrate, psnr});
    } catch (const std::exception&) {
      throw ConfigError("video.ladder: bad pair '" + item + "'");
    }
  }
  ladder.validate();
  return ladder;
}

std::vector<qoe::QoeProfile> load_profiles_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profiles file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line) != "user_id,w_quality,w_stall") {
    throw ConfigError("profiles file '" + path + "': expected header user_id,w_quality,w_stall");
  }
  std::vector<qoe::QoeProfile> profiles;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw ConfigError("profiles file '" + path + "': bad row '" + line + "'");
    }
    qoe::QoeProfile p;
    try {
      p.user_id = std::stoi(a);
      p.w_quality = std::stod(b);
      p.w_stall = std::stod(c);
    } catch (const std::exception&) {
      throw ConfigError("profiles file '" + path + "': bad row '" + line + "'");
    }
    if (std::abs(p.w_quality + p.w_stall - 1.0) > 1e-6 || p.w_quality < 0 || p.w_stall < 0) {
      throw ConfigError("profiles file '" + path + "': weights must be on the unit simplex");
    }
    profiles.push_back(p);
  }
  return profiles;
}

void save_profiles_csv(const std::vector<qoe::QoeProfile>& profiles, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write profiles file '" + path + "'");
  out << "user_id,w_quality,w_stall\n";
  char buf[128];
  for (const auto& p : profiles) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g\n", p.user_id, p.w_quality, p.w_stall);
    out << buf;
  }
}

sim::SimConfig load_sim_config(const ConfigMap& map) {
  sim::SimConfig cfg;
  cfg.n_users = static_cast<int>(map.get_int("sim.n_users", cfg.n_users));
  cfg.horizon_slots = static_cast<int>(map.get_int("sim.horizon_slots", cfg.horizon_slots));
  cfg.slot_s = map.get_double("video.slot_s", cfg.slot_s);
  cfg.bandwidth_hz = map.get_double("sim.bandwidth_hz", cfg.bandwidth_hz);
  cfg.seed = map.get_uint("sim.seed", cfg.seed);

  cfg.cell.radius_m = map.get_double("cell.radius_m", cfg.cell.radius_m);
  cfg.cell.min_distance_m = map.get_double("cell.min_distance_m", cfg.cell.min_distance_m);
  cfg.path_loss.pl0_db = map.get_double("channel.pl0_db", cfg.path_loss.pl0_db);
  cfg.path_loss.exponent = map.get_double("channel.eta", cfg.path_loss.exponent);
  cfg.noise.psd_dbm_hz = map.get_double("noise.psd_dbm_hz", cfg.noise.psd_dbm_hz);
  cfg.noise.noise_figure_db = map.get_double("noise.nf_db", cfg.noise.noise_figure_db);
  cfg.mobility_speed_mps = map.get_double("mobility.speed_mps", cfg.mobility_speed_mps);

  double power_dbm = map.get_double("noma.total_power_dbm", 20.0);
  cfg.noma.total_power_w = std::pow(10.0, (power_dbm - 30.0) / 10.0);
  cfg.noma.max_cluster_size =
      static_cast<int>(map.get_int("noma.max_cluster_size", cfg.noma.max_cluster_size));
  cfg.noma.power_grid_step = map.get_double("noma.power_grid_step", cfg.noma.power_grid_step);
  cfg.noma.stale_csi = map.get_bool("noma.stale_csi", cfg.noma.stale_csi);

  if (map.has("video.ladder")) {
    cfg.ladder = parse_ladder(map.get_string("video.ladder", ""));
  }
  cfg.startup_threshold_s =
      map.get_double("video.startup_threshold_s", cfg.startup_threshold_s);
  cfg.video_length_s = map.get_double("video.length_s", cfg.video_length_s);

  cfg.sched.mode = sched::mode_from_name(map.get_string("sched.mode", "qoe_aware"));
  cfg.sched.omega = map.get_double("sched.omega", cfg.sched.omega);
  cfg.sched.decision_space_limit =
      map.get_int("sched.decision_space_limit", cfg.sched.decision_space_limit);

  if (map.has("qoe.profiles_file")) {
    cfg.profiles = load_profiles_csv(map.get_string("qoe.profiles_file", ""));
  } else if (map.has("qoe.w_quality")) {
    std::vector<double> w = map.get_double_list("qoe.w_quality", {});
    if (w.size() == 1) w.assign(static_cast<std::size_t>(cfg.n_users), w[0]);
    if (w.size() != static_cast<std::size_t>(cfg.n_users)) {
      throw ConfigError("qoe.w_quality: need one value or one per user");
    }
    for (std::size_t u = 0; u < w.size(); ++u) {
      if (w[u] < 0.0 || w[u] > 1.0) throw ConfigError("qoe.w_quality values must be in [0,1]");
      cfg.profiles.push_back({static_cast<int>(u), w[u], 1.0 - w[u], false});
    }
  }

  cfg.validate();
  return cfg;
}

GenConfig load_gen_config(const ConfigMap& map) {
  GenConfig g;
  g.n_users = static_cast<int>(map.get_int("gen.n_users", g.n_users));
  g.n_services = static_cast<int>(map.get_int("gen.n_services", g.n_services));
  g.noise_sigma = map.get_double("gen.noise_sigma", g.noise_sigma);
  g.observe_rate = map.get_double("gen.observe_rate", g.observe_rate);
  g.seed = map.get_uint("gen.seed", g.seed);
  if (g.observe_rate < 0.0 || g.observe_rate > 1.0) {
    throw ConfigError("gen.observe_rate must be in [0,1]");
  }
  if (g.noise_sigma < 0.0) throw ConfigError("gen.noise_sigma must be >= 0");
  return g;
}

SweepConfig load_sweep_config(const ConfigMap& map) {
  SweepConfig s;
  s.omega_grid = map.get_double_list("sweep.omega_grid", s.omega_grid);
  s.bandwidth_grid_hz = map.get_double_list("sweep.bandwidth_grid_hz", s.bandwidth_grid_hz);
  s.n_seeds = static_cast<int>(map.get_int("sweep.n_seeds", s.n_seeds));
  s.base_seed = map.get_uint("sweep.base_seed", s.base_seed);
  s.jobs = static_cast<int>(map.get_int("sweep.jobs", s.jobs));
  if (s.n_seeds < 1) throw ConfigError("sweep.n_seeds must be >= 1");
  if (s.jobs < 0) throw ConfigError("sweep.jobs must be >= 0");
  return s;
}

qoe::CmfHyperParams load_cmf_params(const ConfigMap& map) {
  qoe::CmfHyperParams p;
  p.rank = static_cast<int>(map.get_int("cmf.rank", p.rank));
  p.beta_y = map.get_double("cmf.beta_y", p.beta_y);
  p.beta_u = map.get_double("cmf.beta_u", p.beta_u);
  p.beta_s = map.get_double("cmf.beta_s", p.beta_s);
  p.lambda = map.get_double("cmf.lambda", p.lambda);
  p.max_iterations = static_cast<int>(map.get_int("cmf.max_iterations", p.max_iterations));
  p.tolerance = map.get_double("cmf.tolerance", p.tolerance);
  p.seed = map.get_uint("cmf.seed", p.seed);
  p.validate();
  return p;
}

}  // namespace qnoma::config
