#ifndef QNOMA_VIDEO_HPP
#define QNOMA_VIDEO_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace qnoma::video {

struct LadderLevel {
  int level_id = 0;  // 1..L
  double bitrate_bps = 0.0;
  double psnr_db = 0.0;
};

struct QualityLadder {
  std::vector<LadderLevel> levels;  // bitrate and psnr strictly increasing

  static QualityLadder default_ladder();
  void validate() const;
  const LadderLevel& level(int level_id) const;
  int max_level() const { return static_cast<int>(levels.size()); }

  // Normalized quality deficit of a level: 0 at the top level, 1 at the
  // bottom. A single-level ladder has deficit 0.
  double psnr_deficit(int level_id) const;
};

// Transmitter-side backlog of not-yet-delivered content, in seconds.
struct SourceQueue {
  int user_id = 0;
  double backlog_s = 0.0;
  std::int64_t next_chunk_index = 0;
  double remaining_video_s = 0.0;
};

struct BufferedSpan {
  int level_id = 0;
  double seconds = 0.0;
};

enum class PlayKind { kPlayed, kStalled };

struct PlayEvent {
  int slot = 0;
  PlayKind kind = PlayKind::kPlayed;
  int level_id = 0;  // valid when kind == kPlayed
};

// Receiver-side playback buffer. Content is played FIFO in delivery order,
// each delivered second at its delivered level.
struct ClientBuffer {
  int user_id = 0;
  std::deque<BufferedSpan> spans;
  double buffered_s = 0.0;
  bool joined = false;
  std::optional<int> join_slot;
  int stall_count = 0;  // post-join slots that could not play
  std::vector<PlayEvent> played_log;

  std::optional<int> head_level() const {
    if (spans.empty()) return std::nullopt;
    return spans.front().level_id;
  }
};

struct ChunkReceipt {
  int user_id = 0;
  int slot = 0;
  int level_id = 0;  // 0 when the user was not assigned a level
  double delivered_s = 0.0;
  bool success = true;
};

// Live-feed arrival: one slot of fresh content per slot until the source is
// exhausted.
void source_arrival(SourceQueue& queue, double slot_s);

// Whole chunks that fit in the scheduled rate. Shared by the transmitter and
// the schedulers so predicted and realized deliveries agree exactly.
std::int64_t deliverable_chunks(double rate_bps, double bitrate_bps);

// Whole-chunk delivery at one quality level; a decode failure delivers
// nothing and leaves the backlog untouched.
ChunkReceipt transmit(SourceQueue& queue, const QualityLadder& ladder,
                      std::optional<int> level_id, double rate_bps, int slot,
                      double slot_s, bool decode_success);

// One playback step. Within a slot: (1) join once buffered+delivered reaches
// the startup threshold; (2) if already joined, play one slot from the buffer
// head or log a stall; (3) append the delivery. Content delivered in a slot
// becomes playable the next slot, so a user joining this slot starts playing
// on the following one.
void playback_step(ClientBuffer& buffer, const ChunkReceipt& receipt,
                   double slot_s, double startup_threshold_s);

struct QualityMetrics {
  std::optional<double> mean_psnr_db;  // empty = no playback
  int stall_count = 0;
  std::optional<int> join_time_slots;
};

// Mean PSNR over played slots only; stalls counted separately.
QualityMetrics quality_metrics(const ClientBuffer& buffer, const QualityLadder& ladder,
                               int request_slot = 0);

}  // namespace qnoma::video

#endif  // QNOMA_VIDEO_HPP
