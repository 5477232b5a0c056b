#ifndef QNOMA_SCHEDULER_HPP
#define QNOMA_SCHEDULER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "qnoma/channel.hpp"
#include "qnoma/noma.hpp"
#include "qnoma/qoe.hpp"
#include "qnoma/video.hpp"

namespace qnoma::sched {

enum class Mode { kQoeAware, kBaseline };

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct SchedulerConfig {
  Mode mode = Mode::kQoeAware;
  double omega = 8.0;  // weight of the loss penalty against queue service
  std::int64_t decision_space_limit = 1'000'000;
  void validate() const;
};

struct BufferSnapshot {
  bool joined = false;
  double buffered_s = 0.0;
  std::optional<int> head_level;
};

// Everything the per-slot decision reads. Gains are the scheduler-visible
// ones, which lag one slot behind the realized channel in stale-CSI mode.
struct SlotState {
  int slot = 0;
  std::vector<double> gain_lin;
  std::vector<double> backlog_s;
  std::vector<BufferSnapshot> buffers;
  std::vector<qoe::QoeProfile> profiles;
  double bandwidth_hz = 0.0;
  double slot_s = 1.0;
  channel::NoiseConfig noise;
  noma::NomaConfig noma;
  const video::QualityLadder* ladder = nullptr;

  std::size_t n_users() const { return gain_lin.size(); }
};

struct SlotDecision {
  noma::ClusterPlan plan;
  std::vector<std::optional<int>> level;      // per user; nullopt = unserved
  std::vector<double> rate_bps;               // per user, from the plan
  std::vector<double> predicted_delivered_s;  // per user
  double objective = 0.0;  // the selected mode's objective value
};

// Playable seconds the transmitter would deliver for this choice; exactly
// video::transmit's arithmetic on the predicted rate.
double predicted_delivered(const SlotState& state, std::size_t user,
                           std::optional<int> level_id, double rate_bps);

// Predicted per-slot loss for one user under a candidate: the candidate
// level's deficit when the candidate delivers, the buffer-head deficit when
// it delivers nothing but the user still plays, the full stall loss when it
// delivers nothing to a joined user with a dry buffer. Users not yet joined
// contribute no loss.
double predicted_loss(const SlotState& state, std::size_t user,
                      std::optional<int> level_id, double predicted_delivered_s);

// sum_u backlog_u * delivered_u - omega * sum_u loss_u, recomputed from the
// candidate's levels and rates.
double qoe_objective(const SlotState& state, const SlotDecision& candidate,
                     double omega);

// Exhaustive search over partitions x power grids x per-user levels; first
// maximal candidate in canonical enumeration order wins.
SlotDecision schedule_qoe_aware(const SlotState& state, const SchedulerConfig& config);

// Same decision space, maximizing the predicted sum rate; each user then gets
// the highest level its rate can carry. Ignores queues, buffers, profiles,
// and omega.
SlotDecision schedule_baseline(const SlotState& state, const SchedulerConfig& config);

SlotDecision schedule(const SlotState& state, const SchedulerConfig& config);

// A profile bound to a ladder; evaluates the realized per-slot loss.
struct LossEvaluator {
  qoe::QoeProfile profile;
  const video::QualityLadder* ladder = nullptr;
  double operator()(const qoe::SlotOutcome& outcome) const {
    return qoe::qoe_loss(profile, outcome, *ladder);
  }
};

// Packages per-user profiles into loss evaluators; users beyond the profile
// list get the (0.5, 0.5) default.
std::vector<LossEvaluator> map_demands(const std::vector<qoe::QoeProfile>& profiles,
                                       std::size_t n_users,
                                       const video::QualityLadder& ladder);

}  // namespace qnoma::sched

#endif  // QNOMA_SCHEDULER_HPP
