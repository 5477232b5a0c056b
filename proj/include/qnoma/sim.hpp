#ifndef QNOMA_SIM_HPP
#define QNOMA_SIM_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qnoma/channel.hpp"
#include "qnoma/noma.hpp"
#include "qnoma/qoe.hpp"
#include "qnoma/scheduler.hpp"
#include "qnoma/video.hpp"

namespace qnoma::sim {

struct SimConfig {
  int n_users = 4;
  int horizon_slots = 600;
  double slot_s = 1.0;
  double bandwidth_hz = 10e6;
  std::uint64_t seed = 1;

  channel::CellGeometry cell;
  channel::PathLossConfig path_loss;
  channel::NoiseConfig noise;
  double mobility_speed_mps = 1.0;

  noma::NomaConfig noma;

  video::QualityLadder ladder = video::QualityLadder::default_ladder();
  double startup_threshold_s = 2.0;
  double video_length_s = 600.0;

  sched::SchedulerConfig sched;

  // Per-user profiles; missing entries default to (0.5, 0.5).
  std::vector<qoe::QoeProfile> profiles;

  void validate() const;
};

struct UserMetrics {
  std::optional<double> mean_psnr_db;
  int stall_count = 0;
  std::optional<int> join_time_slots;
  double mean_rate_bps = 0.0;
  double delivered_total_s = 0.0;
  double played_total_s = 0.0;
  double final_buffer_s = 0.0;

  bool operator==(const UserMetrics&) const = default;
};

struct RunMetrics {
  std::vector<UserMetrics> users;
  std::optional<double> mean_psnr_db;  // over users with playback
  int stall_count_total = 0;
  std::optional<double> mean_join_time_slots;  // over joined users
  double mean_rate_bps = 0.0;
  double mean_objective = 0.0;

  bool operator==(const RunMetrics&) const = default;
};

// One simulated run. Slot order: arrivals, mobility, channel, schedule,
// decode realization, transmit, playback, accounting. Fully determined by
// (config, seed); an optional trace stream receives one S line per slot and
// one U line per user per slot.
RunMetrics run(const SimConfig& config, std::ostream* trace = nullptr);

std::string format_metrics(const RunMetrics& metrics);

}  // namespace qnoma::sim

#endif  // QNOMA_SIM_HPP
