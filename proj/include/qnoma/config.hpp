#ifndef QNOMA_CONFIG_HPP
#define QNOMA_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qnoma/qoe.hpp"
#include "qnoma/sim.hpp"
#include "qnoma/sweep.hpp"

namespace qnoma::config {

// Flat `key = value` text. '#' starts a comment; blank lines are ignored;
// later assignments win. Unknown keys are rejected.
class ConfigMap {
 public:
  static ConfigMap from_file(const std::string& path);
  static ConfigMap from_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  std::int64_t get_int(const std::string& key, std::int64_t def) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& def) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

// Synthetic dataset generation knobs (gen.*).
struct GenConfig {
  int n_users = 200;
  int n_services = 50;
  double noise_sigma = 0.05;
  double observe_rate = 0.4;
  std::uint64_t seed = 1;
};

// Sweep knobs (sweep.*).
struct SweepConfig {
  std::vector<double> omega_grid = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  std::vector<double> bandwidth_grid_hz = {2.5e6, 5e6, 10e6, 20e6};
  int n_seeds = 30;
  std::uint64_t base_seed = 1;
  int jobs = 0;
};

sim::SimConfig load_sim_config(const ConfigMap& map);
GenConfig load_gen_config(const ConfigMap& map);
SweepConfig load_sweep_config(const ConfigMap& map);
qoe::CmfHyperParams load_cmf_params(const ConfigMap& map);

// `video.ladder = bitrate:psnr,bitrate:psnr,...`, level ids 1..L implied.
video::QualityLadder parse_ladder(const std::string& text);

// profiles.csv with header user_id,w_quality,w_stall.
std::vector<qoe::QoeProfile> load_profiles_csv(const std::string& path);
void save_profiles_csv(const std::vector<qoe::QoeProfile>& profiles,
                       const std::string& path);

}  // namespace qnoma::config

#endif  // QNOMA_CONFIG_HPP
