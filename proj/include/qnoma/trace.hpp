#ifndef QNOMA_TRACE_HPP
#define QNOMA_TRACE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qnoma/sim.hpp"
#include "qnoma/video.hpp"

namespace qnoma::trace {

// Tab-separated run trace. Header comments carry enough of the config to
// recompute every metric; then one S record per slot and one U record per
// (slot, user):
//
//   S <slot> <objective> <plan>
//   U <slot> <user> <gain_lin> <backlog_s> <level|-> <rate_bps>
//     <delivered_s> <buffered_s> <played: L<k>|STALL|-> <joined> <loss>
//
// Doubles are printed with %.17g so parsing restores them exactly.

struct UserRow {
  int slot = 0;
  int user = 0;
  double gain_lin = 0.0;
  double backlog_s = 0.0;
  std::optional<int> level;
  double rate_bps = 0.0;
  double delivered_s = 0.0;
  double buffered_s = 0.0;
  char played_kind = '-';  // 'L' played, 'S' stalled, '-' idle
  int played_level = 0;
  bool joined = false;
  double loss = 0.0;
};

struct SlotRow {
  int slot = 0;
  double objective = 0.0;
  std::string plan;
};

struct TraceData {
  int n_users = 0;
  int horizon_slots = 0;
  double slot_s = 1.0;
  double startup_threshold_s = 2.0;
  double bandwidth_hz = 0.0;
  std::uint64_t seed = 0;
  std::string mode;
  double omega = 0.0;
  video::QualityLadder ladder;
  std::vector<SlotRow> slots;
  std::vector<UserRow> rows;  // slot-major, user-minor
};

void write_header(std::ostream& out, const sim::SimConfig& config);
void write_slot_row(std::ostream& out, const SlotRow& row);
void write_user_row(std::ostream& out, const UserRow& row);

TraceData parse_trace(std::istream& in);

// Recomputes RunMetrics from a parsed trace with the same arithmetic the
// simulation uses, so the result matches the reported metrics exactly.
sim::RunMetrics replay_metrics(const TraceData& data);

}  // namespace qnoma::trace

#endif  // QNOMA_TRACE_HPP
