#include "skygrid/server/reassembly.hpp"

#include "skygrid/drone/frame.hpp"

namespace skygrid::server {

ReassemblyBuffer::ReassemblyBuffer(Duration playout_budget) : budget_(playout_budget) {}

IngestResult ReassemblyBuffer::ingest(const Packet& pkt, SimTime now) {
  if (pkt.kind != PacketKind::data || pkt.frame_fragments == 0 ||
      pkt.fragment_idx >= pkt.frame_fragments) {
    return IngestResult::rejected;
  }
  if ((resolved_ && pkt.frame_seq <= *resolved_) || now > pkt.capture_ts + budget_) {
    ++stats_.late_fragments;
    return IngestResult::late;
  }

  auto [it, inserted] = frames_.try_emplace(pkt.frame_seq);
  Assembly& a = it->second;
  if (inserted) {
    a.meta = FrameMeta{pkt.frame_seq,     pkt.capture_ts,      pkt.camera_yaw,  pkt.gimbal_pitch,
                       pkt.frame_fragments, pkt.frame_bytes, pkt.frame_checksum};
    a.fragments.resize(pkt.frame_fragments);
    a.have.assign(pkt.frame_fragments, false);
  }
  if (a.complete || a.corrupt || pkt.fragment_idx >= a.have.size() || a.have[pkt.fragment_idx]) {
    ++stats_.duplicates;
    return IngestResult::duplicate;
  }
  a.have[pkt.fragment_idx] = true;
  a.fragments[pkt.fragment_idx] = pkt.payload;
  if (++a.received < a.meta.fragment_count) return IngestResult::stored;

  Bytes payload;
  payload.reserve(a.meta.frame_bytes);
  for (Bytes& f : a.fragments) payload.insert(payload.end(), f.begin(), f.end());
  a.fragments.clear();
  a.fragments.shrink_to_fit();
  if (payload.size() != a.meta.frame_bytes || drone::checksum32(payload) != a.meta.checksum) {
    a.corrupt = true;
    ++stats_.corrupt_frames;
    return IngestResult::corrupt;
  }
  a.complete = true;
  a.payload = std::move(payload);
  a.completed_at = now;
  return IngestResult::completed;
}

PlayoutResult ReassemblyBuffer::playout(SimTime now) {
  PlayoutResult result;

  // Deadlines grow with frame_seq, so the due frames are a prefix of the map.
  auto due_end = frames_.begin();
  auto newest_complete = frames_.end();
  for (; due_end != frames_.end() && due_end->second.meta.capture_ts + budget_ <= now; ++due_end) {
    if (due_end->second.complete) newest_complete = due_end;
  }

  if (due_end != frames_.begin()) {
    const std::uint32_t first = resolved_ ? *resolved_ + 1 : 0;
    const std::uint32_t last_due = std::prev(due_end)->first;
    const std::optional<std::uint32_t> shown =
        newest_complete != frames_.end() ? std::optional(newest_complete->first) : std::nullopt;
    for (std::uint32_t seq = first; seq <= last_due; ++seq) {
      if (seq != shown) result.skipped.push_back(seq);
    }
    if (newest_complete != frames_.end()) {
      Assembly& a = newest_complete->second;
      result.delivered = DeliveredFrame{a.meta, std::move(a.payload), a.completed_at};
      showing_ = a.meta;
      ++stats_.delivered;
    }
    resolved_ = last_due;
    frames_.erase(frames_.begin(), due_end);
    stats_.skipped += result.skipped.size();
  }

  if (!result.delivered && showing_) {
    result.freeze = true;
    ++stats_.freezes;
  }
  return result;
}

}  // namespace skygrid::server
