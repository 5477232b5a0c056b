#include "qnoma/video.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qnoma/errors.hpp"

namespace qnoma::video {

namespace {
constexpr double kEps = 1e-9;
}

QualityLadder QualityLadder::default_ladder() {
  QualityLadder l;
  l.levels = {{1, 0.8e6, 32.0}, {2, 1.5e6, 36.0}, {3, 3.0e6, 40.0}, {4, 6.0e6, 44.0}};
  return l;
}

void QualityLadder::validate() const {
  if (levels.empty()) throw ConfigError("quality ladder must have at least one level");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].level_id != static_cast<int>(i) + 1) {
      throw ConfigError("ladder level ids must be 1..L in order");
    }
    if (!(levels[i].bitrate_bps > 0.0)) throw ConfigError("ladder bitrates must be positive");
    if (i > 0) {
      if (!(levels[i].bitrate_bps > levels[i - 1].bitrate_bps) ||
          !(levels[i].psnr_db > levels[i - 1].psnr_db)) {
        throw ConfigError("ladder bitrate and psnr must be strictly increasing");
      }
    }
  }
}

const LadderLevel& QualityLadder::level(int level_id) const {
  if (level_id < 1 || level_id > static_cast<int>(levels.size())) {
    throw SimError("unknown ladder level " + std::to_string(level_id));
  }
  return levels[static_cast<std::size_t>(level_id - 1)];
}

double QualityLadder::psnr_deficit(int level_id) const {
  const double top = levels.back().psnr_db;
  const double bottom = levels.front().psnr_db;
  if (top <= bottom) return 0.0;  // single-level ladder
  return (top - level(level_id).psnr_db) / (top - bottom);
}

void source_arrival(SourceQueue& queue, double slot_s) {
  if (!(slot_s > 0.0)) throw ConfigError("slot duration must be positive");
  double arrival = std::min(slot_s, queue.remaining_video_s);
  if (arrival <= 0.0) return;
  queue.backlog_s += arrival;
  queue.remaining_video_s -= arrival;
}

std::int64_t deliverable_chunks(double rate_bps, double bitrate_bps) {
  if (!(bitrate_bps > 0.0) || rate_bps <= 0.0) return 0;
  double n = std::floor(rate_bps / bitrate_bps + kEps);
  if (n > 1e15) n = 1e15;  // keep the count finite for absurd rate/bitrate ratios
  return static_cast<std::int64_t>(n);
}

ChunkReceipt transmit(SourceQueue& queue, const QualityLadder& ladder,
                      std::optional<int> level_id, double rate_bps, int slot,
                      double slot_s, bool decode_success) {
  ChunkReceipt r;
  r.user_id = queue.user_id;
  r.slot = slot;
  r.level_id = level_id.value_or(0);
  r.success = decode_success;
  if (!level_id || !decode_success) return r;

  const LadderLevel& lv = ladder.level(*level_id);
  std::int64_t n = deliverable_chunks(rate_bps, lv.bitrate_bps);
  double delivered = std::min(queue.backlog_s, static_cast<double>(n) * slot_s);
  if (delivered <= 0.0) return r;

  r.delivered_s = delivered;
  queue.backlog_s -= delivered;
  queue.next_chunk_index +=
      static_cast<std::int64_t>(std::ceil(delivered / slot_s - kEps));
  return r;
}

namespace {

// Consume seconds from the head of the buffer; returns the head level.
int consume_from_head(ClientBuffer& b, double seconds) {
  int head = b.spans.front().level_id;
  double left = seconds;
  while (left > kEps && !b.spans.empty()) {
    BufferedSpan& s = b.spans.front();
    double take = std::min(s.seconds, left);
    s.seconds -= take;
    left -= take;
    if (s.seconds <= kEps) b.spans.pop_front();
  }
  b.buffered_s = std::max(0.0, b.buffered_s - seconds);
  return head;
}

}  // namespace

void playback_step(ClientBuffer& buffer, const ChunkReceipt& receipt,
                   double slot_s, double startup_threshold_s) {
  bool joined_now = false;
  if (!buffer.joined &&
      buffer.buffered_s + receipt.delivered_s >= startup_threshold_s - kEps) {
    buffer.joined = true;
    buffer.join_slot = receipt.slot;
    joined_now = true;
  }

  // Playback starts the slot after join; this slot's delivery is not yet
  // playable.
  if (buffer.joined && !joined_now) {
    if (buffer.buffered_s >= slot_s - kEps) {
      int head = consume_from_head(buffer, slot_s);
      buffer.played_log.push_back({receipt.slot, PlayKind::kPlayed, head});
    } else {
      ++buffer.stall_count;
      buffer.played_log.push_back({receipt.slot, PlayKind::kStalled, 0});
    }
  }

  if (receipt.delivered_s > 0.0) {
    buffer.spans.push_back({receipt.level_id, receipt.delivered_s});
    buffer.buffered_s += receipt.delivered_s;
  }
}

QualityMetrics quality_metrics(const ClientBuffer& buffer, const QualityLadder& ladder,
                               int request_slot) {
  QualityMetrics m;
  m.stall_count = buffer.stall_count;
  if (buffer.join_slot) m.join_time_slots = *buffer.join_slot - request_slot;

  double sum = 0.0;
  int played = 0;
  for (const PlayEvent& e : buffer.played_log) {
    if (e.kind == PlayKind::kPlayed) {
      sum += ladder.level(e.level_id).psnr_db;
      ++played;
    }
  }
  if (played > 0) m.mean_psnr_db = sum / played;
  return m;
}

}  // namespace qnoma::video
