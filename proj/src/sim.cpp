#include "qnoma/sim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "qnoma/errors.hpp"
#include "qnoma/trace.hpp"

namespace qnoma::sim {

void SimConfig::validate() const {
  if (n_users < 1 || n_users > 6) {
    throw ConfigError("sim.n_users must be 1..6 (exhaustive clustering search)");
  }
  if (horizon_slots < 0) throw ConfigError("sim.horizon_slots must be >= 0");
  if (!(slot_s > 0.0)) throw ConfigError("video.slot_s must be positive");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("sim.bandwidth_hz must be positive");
  if (startup_threshold_s < 0.0) throw ConfigError("video.startup_threshold_s must be >= 0");
  if (video_length_s < 0.0) throw ConfigError("video.length_s must be >= 0");
  cell.validate();
  noise.validate();
  noma.validate();
  ladder.validate();
  sched.validate();
  if (!(mobility_speed_mps >= 0.0)) throw ConfigError("mobility.speed_mps must be >= 0");
  for (const auto& p : profiles) {
    if (p.w_quality < 0 || p.w_stall < 0 || std::abs(p.w_quality + p.w_stall - 1.0) > 1e-6) {
      throw ConfigError("qoe profiles must lie on the unit simplex");
    }
  }
}

namespace {

std::string plan_string(const noma::ClusterPlan& plan) {
  std::ostringstream out;
  char buf[64];
  for (std::size_t c = 0; c < plan.clusters.size(); ++c) {
    if (c) out << '|';
    for (std::size_t i = 0; i < plan.clusters[c].members.size(); ++i) {
      if (i) out << ',';
      out << plan.clusters[c].members[i];
    }
    out << ':';
    for (std::size_t i = 0; i < plan.allocations[c].fractions.size(); ++i) {
      if (i) out << '/';
      std::snprintf(buf, sizeof(buf), "%.6g", plan.allocations[c].fractions[i]);
      out << buf;
    }
  }
  return out.str();
}

}  // namespace

RunMetrics run(const SimConfig& config, std::ostream* trace_out) {
  config.validate();
  const std::size_t n = static_cast<std::size_t>(config.n_users);
  const double slot_s = config.slot_s;

  // Per-user state.
  std::vector<video::SourceQueue> queues(n);
  std::vector<video::ClientBuffer> buffers(n);
  std::vector<qoe::QoeProfile> profiles(n);
  for (std::size_t u = 0; u < n; ++u) {
    queues[u].user_id = static_cast<int>(u);
    queues[u].remaining_video_s = config.video_length_s;
    buffers[u].user_id = static_cast<int>(u);
    profiles[u].user_id = static_cast<int>(u);
    if (u < config.profiles.size()) {
      profiles[u] = config.profiles[u];
      profiles[u].user_id = static_cast<int>(u);
    }
  }

  Rng mobility_rng(mix_seed(config.seed, 0xA0B1));
  auto users = channel::init_users(config.n_users, config.cell,
                                   config.mobility_speed_mps, mobility_rng);

  if (trace_out) trace::write_header(*trace_out, config);

  std::vector<double> gains(n, 0.0);
  std::vector<double> prev_gains(n, 0.0);
  std::vector<double> rate_sum(n, 0.0);
  std::vector<double> delivered_sum(n, 0.0);
  std::vector<bool> complete(n, false);
  double objective_sum = 0.0;

  for (int t = 0; t < config.horizon_slots; ++t) {
    // (1) fresh content arrives at the transmitter queues
    for (auto& q : queues) video::source_arrival(q, slot_s);

    // (2)-(3) mobility and block-fading channel
    channel::advance_mobility(users, config.cell, slot_s, mobility_rng);
    prev_gains = gains;
    for (std::size_t u = 0; u < n; ++u) {
      gains[u] = channel::sample_channel(config.seed, t, users[u], config.path_loss,
                                         config.cell)
                     .gain_lin;
    }

    // (4) joint per-slot decision
    sched::SlotState state;
    state.slot = t;
    state.gain_lin = (config.noma.stale_csi && t > 0) ? prev_gains : gains;
    state.backlog_s.resize(n);
    state.buffers.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
      state.backlog_s[u] = queues[u].backlog_s;
      state.buffers[u] = {buffers[u].joined, buffers[u].buffered_s, buffers[u].head_level()};
    }
    state.profiles = profiles;
    state.bandwidth_hz = config.bandwidth_hz;
    state.slot_s = slot_s;
    state.noise = config.noise;
    state.noma = config.noma;
    state.ladder = &config.ladder;

    sched::SlotDecision decision = sched::schedule(state, config.sched);
    objective_sum += decision.objective;

    // (5) realized decode outcome: with stale CSI the plan was built on old
    // gains, so receivers may fail layers at the realized ones.
    std::vector<bool> decode_ok(n, true);
    if (config.noma.stale_csi) {
      const double noise_c =
          channel::noise_power(decision.plan.bandwidth_per_cluster_hz, config.noise);
      for (std::size_t c = 0; c < decision.plan.clusters.size(); ++c) {
        const noma::Cluster& cluster = decision.plan.clusters[c];
        std::vector<double> assigned(cluster.members.size(), 0.0);
        for (std::size_t i = 0; i < cluster.members.size(); ++i) {
          std::size_t u = static_cast<std::size_t>(cluster.members[i]);
          if (!decision.level[u]) continue;
          // Bits actually modulated for this member this slot.
          double would_deliver =
              sched::predicted_delivered(state, u, decision.level[u], decision.rate_bps[u]);
          assigned[i] = would_deliver / slot_s *
                        config.ladder.level(*decision.level[u]).bitrate_bps;
        }
        auto layer_rates = noma::sic_layer_rates(
            cluster, decision.plan.allocations[c], decision.plan.bandwidth_per_cluster_hz,
            decision.plan.power_per_cluster_w, noise_c, gains);
        auto ok = noma::sic_decode_outcome(cluster, assigned, layer_rates);
        for (std::size_t i = 0; i < cluster.members.size(); ++i) {
          decode_ok[static_cast<std::size_t>(cluster.members[i])] = ok[i];
        }
      }
    }

    if (trace_out) {
      trace::write_slot_row(*trace_out, {t, decision.objective, plan_string(decision.plan)});
    }

    // (6)-(8) transmit, play back, account
    for (std::size_t u = 0; u < n; ++u) {
      video::ChunkReceipt receipt =
          video::transmit(queues[u], config.ladder, decision.level[u],
                          decision.rate_bps[u], t, slot_s, decode_ok[u]);
      rate_sum[u] += decision.rate_bps[u];
      delivered_sum[u] += receipt.delivered_s;

      qoe::SlotOutcome outcome = qoe::SlotOutcome::not_joined();
      if (!complete[u]) {
        std::size_t log_before = buffers[u].played_log.size();
        video::playback_step(buffers[u], receipt, slot_s, config.startup_threshold_s);
        if (buffers[u].played_log.size() > log_before) {
          const video::PlayEvent& e = buffers[u].played_log.back();
          outcome = e.kind == video::PlayKind::kPlayed
                        ? qoe::SlotOutcome::played(e.level_id)
                        : qoe::SlotOutcome::stalled();
        }
        // A drained user with an exhausted source can never play again.
        if (queues[u].remaining_video_s <= 0.0 && queues[u].backlog_s <= 0.0 &&
            buffers[u].joined && buffers[u].buffered_s < slot_s - 1e-9) {
          complete[u] = true;
        }
      }
      double loss = qoe::qoe_loss(profiles[u], outcome, config.ladder);

      if (trace_out) {
        trace::UserRow row;
        row.slot = t;
        row.user = static_cast<int>(u);
        row.gain_lin = state.gain_lin[u];
        row.backlog_s = state.backlog_s[u];
        row.level = decision.level[u];
        row.rate_bps = decision.rate_bps[u];
        row.delivered_s = receipt.delivered_s;
        row.buffered_s = buffers[u].buffered_s;
        if (outcome.kind == qoe::OutcomeKind::kPlayed) {
          row.played_kind = 'L';
          row.played_level = outcome.level_id;
        } else if (outcome.kind == qoe::OutcomeKind::kStalled) {
          row.played_kind = 'S';
        }
        row.joined = buffers[u].joined;
        row.loss = loss;
        trace::write_user_row(*trace_out, row);
      }
    }
  }

  // Aggregate metrics.
  RunMetrics m;
  m.users.resize(n);
  double psnr_sum = 0.0;
  int psnr_users = 0;
  double join_sum = 0.0;
  int joined_users = 0;
  double rate_total = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    video::QualityMetrics qm = video::quality_metrics(buffers[u], config.ladder, 0);
    UserMetrics& um = m.users[u];
    um.mean_psnr_db = qm.mean_psnr_db;
    um.stall_count = qm.stall_count;
    um.join_time_slots = qm.join_time_slots;
    um.mean_rate_bps =
        config.horizon_slots > 0 ? rate_sum[u] / config.horizon_slots : 0.0;
    um.delivered_total_s = delivered_sum[u];
    double played = 0.0;
    for (const auto& e : buffers[u].played_log) {
      if (e.kind == video::PlayKind::kPlayed) played += slot_s;
    }
    um.played_total_s = played;
    um.final_buffer_s = buffers[u].buffered_s;

    if (um.mean_psnr_db) {
      psnr_sum += *um.mean_psnr_db;
      ++psnr_users;
    }
    if (um.join_time_slots) {
      join_sum += *um.join_time_slots;
      ++joined_users;
    }
    m.stall_count_total += um.stall_count;
    rate_total += um.mean_rate_bps;
  }
  if (psnr_users > 0) m.mean_psnr_db = psnr_sum / psnr_users;
  if (joined_users > 0) m.mean_join_time_slots = join_sum / joined_users;
  m.mean_rate_bps = n > 0 ? rate_total / static_cast<double>(n) : 0.0;
  m.mean_objective =
      config.horizon_slots > 0 ? objective_sum / config.horizon_slots : 0.0;
  return m;
}

std::string format_metrics(const RunMetrics& m) {
  std::ostringstream out;
  char buf[256];
  for (std::size_t u = 0; u < m.users.size(); ++u) {
    const UserMetrics& um = m.users[u];
    if (um.mean_psnr_db) {
      std::snprintf(buf, sizeof(buf), "user %zu: mean_psnr_db=%.4f", u, *um.mean_psnr_db);
    } else {
      std::snprintf(buf, sizeof(buf), "user %zu: mean_psnr_db=no-playback", u);
    }
    out << buf;
    if (um.join_time_slots) {
      std::snprintf(buf, sizeof(buf), " stalls=%d join_slots=%d mean_rate_bps=%.4g\n",
                    um.stall_count, *um.join_time_slots, um.mean_rate_bps);
    } else {
      std::snprintf(buf, sizeof(buf), " stalls=%d join_slots=never mean_rate_bps=%.4g\n",
                    um.stall_count, um.mean_rate_bps);
    }
    out << buf;
  }
  if (m.mean_psnr_db) {
    std::snprintf(buf, sizeof(buf), "aggregate: mean_psnr_db=%.4f", *m.mean_psnr_db);
  } else {
    std::snprintf(buf, sizeof(buf), "aggregate: mean_psnr_db=no-playback");
  }
  out << buf;
  if (m.mean_join_time_slots) {
    std::snprintf(buf, sizeof(buf),
                  " stalls=%d mean_join_slots=%.3f mean_rate_bps=%.4g mean_objective=%.6g\n",
                  m.stall_count_total, *m.mean_join_time_slots, m.mean_rate_bps,
                  m.mean_objective);
  } else {
    std::snprintf(buf, sizeof(buf),
                  " stalls=%d mean_join_slots=never mean_rate_bps=%.4g mean_objective=%.6g\n",
                  m.stall_count_total, m.mean_rate_bps, m.mean_objective);
  }
  out << buf;
  return out.str();
}

}  // namespace qnoma::sim
