#include "qnoma/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qnoma/errors.hpp"

namespace qnoma::sched {

const char* mode_name(Mode mode) {
  return mode == Mode::kQoeAware ? "qoe_aware" : "baseline";
}

Mode mode_from_name(const std::string& name) {
  if (name == "qoe_aware") return Mode::kQoeAware;
  if (name == "baseline") return Mode::kBaseline;
  throw ConfigError("unknown scheduler mode '" + name + "' (qoe_aware|baseline)");
}

void SchedulerConfig::validate() const {
  if (!(omega >= 0.0)) throw ConfigError("sched.omega must be >= 0");
  if (decision_space_limit < 1) throw ConfigError("sched.decision_space_limit must be >= 1");
}

double predicted_delivered(const SlotState& state, std::size_t user,
                           std::optional<int> level_id, double rate_bps) {
  if (!level_id) return 0.0;
  const video::LadderLevel& lv = state.ladder->level(*level_id);
  std::int64_t n = video::deliverable_chunks(rate_bps, lv.bitrate_bps);
  return std::min(state.backlog_s[user], static_cast<double>(n) * state.slot_s);
}

double predicted_loss(const SlotState& state, std::size_t user,
                      std::optional<int> level_id, double predicted_delivered_s) {
  const BufferSnapshot& buf = state.buffers[user];
  if (!buf.joined) return 0.0;
  const qoe::QoeProfile& prof = state.profiles[user];
  if (predicted_delivered_s > 0.0 && level_id) {
    return prof.w_quality * state.ladder->psnr_deficit(*level_id);
  }
  if (buf.buffered_s >= state.slot_s - 1e-9 && buf.head_level) {
    return prof.w_quality * state.ladder->psnr_deficit(*buf.head_level);
  }
  return 1.0;  // predicted stall
}

double qoe_objective(const SlotState& state, const SlotDecision& candidate,
                     double omega) {
  double obj = 0.0;
  for (std::size_t u = 0; u < state.n_users(); ++u) {
    double p = predicted_delivered(state, u, candidate.level[u], candidate.rate_bps[u]);
    obj += state.backlog_s[u] * p - omega * predicted_loss(state, u, candidate.level[u], p);
  }
  return obj;
}

namespace {

// Nominal size of the joint decision space, for the guard. The searched space
// is partitions x per-cluster power grids x per-user (levels + unserved).
void check_decision_space(const SlotState& state, const SchedulerConfig& config,
                          const std::vector<noma::Partition>& partitions) {
  const double level_options = static_cast<double>(state.ladder->max_level() + 1);
  double level_combos = std::pow(level_options, static_cast<double>(state.n_users()));
  double total = 0.0;
  double max_power_combos = 0.0;
  for (const noma::Partition& p : partitions) {
    double combos = 1.0;
    for (const auto& block : p) {
      combos *= static_cast<double>(
          noma::power_grid(block.size(), state.noma.power_grid_step).size());
    }
    max_power_combos = std::max(max_power_combos, combos);
    total += combos * level_combos;
  }
  if (total > static_cast<double>(config.decision_space_limit)) {
    throw SimError(
        "decision space too large: " + std::to_string(total) + " candidates (partitions=" +
        std::to_string(partitions.size()) + ", max power combos per partition=" +
        std::to_string(static_cast<long long>(max_power_combos)) + ", level combos=" +
        std::to_string(static_cast<long long>(level_combos)) +
        "); raise sched.decision_space_limit or shrink the grid");
  }
}

std::vector<int> all_user_ids(std::size_t n) {
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i);
  return ids;
}

// Walks every (partition, per-cluster allocation) candidate in canonical
// order: partitions as enumerated, allocation combinations lexicographic with
// the first cluster most significant. The visitor sees the built plan plus
// per-user rates.
template <typename Visitor>
void for_each_plan(const SlotState& state, Visitor&& visit) {
  const std::size_t n = state.n_users();
  auto partitions = noma::enumerate_partitions(all_user_ids(n), state.noma.max_cluster_size);
  for (const noma::Partition& partition : partitions) {
    const std::size_t n_clusters = partition.size();
    noma::ClusterPlan plan;
    plan.bandwidth_per_cluster_hz = state.bandwidth_hz / static_cast<double>(n_clusters);
    plan.power_per_cluster_w = state.noma.total_power_w / static_cast<double>(n_clusters);
    const double noise_w = channel::noise_power(plan.bandwidth_per_cluster_hz, state.noise);

    plan.clusters.clear();
    std::vector<std::vector<noma::PowerAllocation>> grids;
    bool feasible = true;
    for (const auto& block : partition) {
      plan.clusters.push_back(noma::order_cluster(block, state.gain_lin));
      grids.push_back(noma::power_grid(block.size(), state.noma.power_grid_step));
      if (grids.back().empty()) feasible = false;  // step too coarse for this size
    }
    if (!feasible) continue;

    std::vector<std::size_t> idx(n_clusters, 0);
    std::vector<double> rates(n, 0.0);
    for (;;) {
      plan.allocations.clear();
      for (std::size_t c = 0; c < n_clusters; ++c) {
        plan.allocations.push_back(grids[c][idx[c]]);
      }
      for (std::size_t c = 0; c < n_clusters; ++c) {
        auto cluster_rates =
            noma::sic_rates(plan.clusters[c], plan.allocations[c],
                            plan.bandwidth_per_cluster_hz, plan.power_per_cluster_w,
                            noise_w, state.gain_lin);
        for (std::size_t i = 0; i < plan.clusters[c].members.size(); ++i) {
          rates[static_cast<std::size_t>(plan.clusters[c].members[i])] = cluster_rates[i];
        }
      }
      visit(plan, rates);

      // Odometer: last cluster fastest.
      bool advanced = false;
      for (std::size_t c = n_clusters; c-- > 0;) {
        if (++idx[c] < grids[c].size()) {
          advanced = true;
          break;
        }
        idx[c] = 0;
      }
      if (!advanced) break;
    }
  }
}

}  // namespace

SlotDecision schedule_qoe_aware(const SlotState& state, const SchedulerConfig& config) {
  config.validate();
  const std::size_t n = state.n_users();
  auto partitions = noma::enumerate_partitions(all_user_ids(n), state.noma.max_cluster_size);
  check_decision_space(state, config, partitions);

  const int n_levels = state.ladder->max_level();
  SlotDecision best;
  bool have_best = false;

  for_each_plan(state, [&](const noma::ClusterPlan& plan, const std::vector<double>& rates) {
    // The objective separates per user, so the best joint level choice is the
    // per-user argmax; taking the first maximal option per user reproduces
    // the tie-break of a full lexicographic enumeration (unserved first, then
    // levels ascending).
    double objective = 0.0;
    std::vector<std::optional<int>> levels(n);
    std::vector<double> delivered(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      std::optional<int> best_level;  // option 0: unserved
      double best_p = predicted_delivered(state, u, std::nullopt, rates[u]);
      double best_value = state.backlog_s[u] * best_p -
                          config.omega * predicted_loss(state, u, std::nullopt, best_p);
      for (int l = 1; l <= n_levels; ++l) {
        double p = predicted_delivered(state, u, l, rates[u]);
        double value = state.backlog_s[u] * p -
                       config.omega * predicted_loss(state, u, l, p);
        if (value > best_value) {
          best_value = value;
          best_level = l;
          best_p = p;
        }
      }
      levels[u] = best_level;
      delivered[u] = best_p;
      objective += best_value;
    }

    if (!have_best || objective > best.objective) {
      have_best = true;
      best.plan = plan;
      best.level = std::move(levels);
      best.rate_bps = rates;
      best.predicted_delivered_s = std::move(delivered);
      best.objective = objective;
    }
  });
  return best;
}

SlotDecision schedule_baseline(const SlotState& state, const SchedulerConfig& config) {
  config.validate();
  const std::size_t n = state.n_users();
  auto partitions = noma::enumerate_partitions(all_user_ids(n), state.noma.max_cluster_size);
  check_decision_space(state, config, partitions);

  SlotDecision best;
  bool have_best = false;
  for_each_plan(state, [&](const noma::ClusterPlan& plan, const std::vector<double>& rates) {
    double sum_rate = 0.0;
    for (double r : rates) sum_rate += r;
    if (!have_best || sum_rate > best.objective) {
      have_best = true;
      best.plan = plan;
      best.rate_bps = rates;
      best.objective = sum_rate;
    }
  });

  // Highest level each rate can carry; queues, buffers, and profiles are
  // deliberately ignored.
  best.level.assign(n, std::nullopt);
  best.predicted_delivered_s.assign(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (int l = state.ladder->max_level(); l >= 1; --l) {
      if (video::deliverable_chunks(best.rate_bps[u], state.ladder->level(l).bitrate_bps) >= 1) {
        best.level[u] = l;
        break;
      }
    }
    best.predicted_delivered_s[u] =
        predicted_delivered(state, u, best.level[u], best.rate_bps[u]);
  }
  return best;
}

SlotDecision schedule(const SlotState& state, const SchedulerConfig& config) {
  if (state.n_users() != state.backlog_s.size() ||
      state.n_users() != state.buffers.size() ||
      state.n_users() != state.profiles.size() || state.ladder == nullptr) {
    throw SimError("inconsistent slot state");
  }
  return config.mode == Mode::kQoeAware ? schedule_qoe_aware(state, config)
                                        : schedule_baseline(state, config);
}

std::vector<LossEvaluator> map_demands(const std::vector<qoe::QoeProfile>& profiles,
                                       std::size_t n_users,
                                       const video::QualityLadder& ladder) {
  std::vector<LossEvaluator> evals;
  evals.reserve(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    LossEvaluator e;
    e.ladder = &ladder;
    if (u < profiles.size()) {
      e.profile = profiles[u];
    } else {
      e.profile.user_id = static_cast<int>(u);  // (0.5, 0.5) default
    }
    evals.push_back(e);
  }
  return evals;
}

}  // namespace qnoma::sched
