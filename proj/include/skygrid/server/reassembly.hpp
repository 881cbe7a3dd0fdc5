#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "skygrid/messages.hpp"

namespace skygrid::server {

struct FrameMeta {
  std::uint32_t frame_seq = 0;
  SimTime capture_ts{};
  double camera_yaw = 0.0;
  double gimbal_pitch = 0.0;
  std::uint32_t fragment_count = 0;
  std::uint32_t frame_bytes = 0;
  std::uint32_t checksum = 0;
};

enum class IngestResult { stored, completed, duplicate, late, corrupt, rejected };

struct DeliveredFrame {
  FrameMeta meta;
  Bytes payload;
  SimTime completed_at{};
};

struct PlayoutResult {
  std::optional<DeliveredFrame> delivered;
  std::vector<std::uint32_t> skipped;  // frame seqs given up on at this tick
  bool freeze = false;                 // previous frame shown again
};

struct PlayoutStats {
  std::uint64_t delivered = 0;
  std::uint64_t skipped = 0;
  std::uint64_t freezes = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t late_fragments = 0;
  std::uint64_t corrupt_frames = 0;
};

// Merges data fragments uploaded by several receivers (first copy wins) and
// plays frames out on a fixed deadline of capture_ts + playout_budget.
//
// At each render tick the newest complete frame whose deadline has passed is
// shown; every other due frame, and any sequence number skipped over, is
// given up. Fragments for a frame that is past its deadline or already given
// up are late and discarded.
class ReassemblyBuffer {
 public:
  explicit ReassemblyBuffer(Duration playout_budget);

  IngestResult ingest(const Packet& pkt, SimTime now);
  PlayoutResult playout(SimTime now);

  const std::optional<FrameMeta>& showing() const noexcept { return showing_; }
  std::optional<std::uint32_t> last_resolved() const noexcept { return resolved_; }
  const PlayoutStats& stats() const noexcept { return stats_; }
  std::size_t pending_frames() const noexcept { return frames_.size(); }
  Duration playout_budget() const noexcept { return budget_; }

 private:
  struct Assembly {
    FrameMeta meta;
    std::vector<Bytes> fragments;
    std::vector<bool> have;
    std::uint32_t received = 0;
    bool complete = false;
    bool corrupt = false;
    Bytes payload;
    SimTime completed_at{};
  };

  Duration budget_;
  std::map<std::uint32_t, Assembly> frames_;
  std::optional<std::uint32_t> resolved_;  // highest seq delivered or given up
  std::optional<FrameMeta> showing_;
  PlayoutStats stats_;
};

}  // namespace skygrid::server
