#include "skygrid/grid/receiver.hpp"

#include <algorithm>

#include "skygrid/drone/fec.hpp"
#include "skygrid/drone/frame.hpp"
#include "skygrid/error.hpp"

namespace skygrid::grid {

Verdict check_overdue(const Packet& pkt, SimTime now, Duration budget) {
  return now - pkt.capture_ts > budget ? Verdict::drop : Verdict::keep;
}

ReceiverNode::ReceiverNode(ReceiverConfig config) : config_(std::move(config)) {
  if (config_.ack_every == 0) throw ConfigError("grid.ack_every", "must be at least 1");
  if (config_.all_sites.empty()) config_.all_sites.push_back(config_.site);
}

ReceiveOutcome ReceiverNode::on_radio_packet(const PacketPtr& pkt, SimTime now) {
  ReceiveOutcome out;
  out.rank_before = rank_;
  ++stats_.rx_packets;
  stats_.rx_bytes += pkt->payload.size();

  update_gate(*pkt, now, out);
  out.rank_after = rank_;
  count_for_ack(*pkt, now, out);
  collect_expired(now);

  if (check_overdue(*pkt, now, config_.overdue_budget) == Verdict::drop) {
    out.overdue = true;
    ++stats_.overdue_drops;
    return out;
  }
  store_and_repair(pkt, out);
  return out;
}

void ReceiverNode::update_gate(const Packet& pkt, SimTime now, ReceiveOutcome& out) {
  if (last_position_seq_ && pkt.tx_seq <= *last_position_seq_) return;
  last_position_seq_ = pkt.tx_seq;
  last_position_ = pkt.drone_pos;
  gate_ = compute_gate(pkt.drone_pos.ground(), config_.all_sites);
  out.gate_recomputed = true;

  const auto self = std::find_if(gate_.begin(), gate_.end(),
                                 [this](const GateDecision& g) { return g.receiver_id == id(); });
  const std::uint32_t new_rank = self == gate_.end() ? 0 : self->rank;
  if (rank_ == 1 && new_rank != 1 && rank1_since_) {
    rank1_time_since_ack_ += now - *rank1_since_;
    rank1_since_.reset();
  } else if (rank_ != 1 && new_rank == 1) {
    rank1_since_ = now;
  }
  rank_ = new_rank;
}

// The ACK clock only runs while this node is the emitter, so a node that
// loses and regains rank 1 resumes its count and measures goodput over its
// rank-1 time only.
void ReceiverNode::count_for_ack(const Packet& pkt, SimTime now, ReceiveOutcome& out) {
  if (rank_ != 1) return;
  ++packets_since_ack_;
  bytes_since_ack_ += pkt.payload.size();
  ++stats_.ack_counted_packets;
  if (packets_since_ack_ < config_.ack_every) return;

  const Duration span = rank1_time_since_ack_ + (now - *rank1_since_);
  if (span.count() <= 0) return;
  out.ack = Ack{id(), now, bytes_since_ack_, span};
  ++stats_.acks_sent;
  packets_since_ack_ = 0;
  bytes_since_ack_ = 0;
  rank1_time_since_ack_ = Duration{0};
  rank1_since_ = now;
}

void ReceiverNode::store_and_repair(const PacketPtr& pkt, ReceiveOutcome& out) {
  const Packet& p = *pkt;
  const std::size_t slots = static_cast<std::size_t>(p.k) + p.r;
  const bool index_ok = p.kind == PacketKind::data ? p.index_in_block < p.block_data_count
                                                   : p.index_in_block >= p.k && p.index_in_block < slots;
  if (p.k == 0 || p.block_data_count == 0 || p.block_data_count > p.k || !index_ok) {
    out.malformed = true;
    return;
  }

  auto [it, inserted] = blocks_.try_emplace(p.block_id);
  BlockState& block = it->second;
  if (inserted) {
    block.capture_ts = p.capture_ts;
    block.k = p.k;
    block.r = p.r;
    block.data_count = p.block_data_count;
    block.slots.resize(slots);
  }
  if (block.slots.size() != slots) {
    out.malformed = true;
    return;
  }
  if (block.slots[p.index_in_block]) {
    out.duplicate = true;
    ++stats_.duplicates;
    return;
  }
  if (block.done) {
    out.block_done = true;
    ++stats_.late_block_drops;
    return;
  }
  block.slots[p.index_in_block] = pkt;
  ++block.received;
  if (p.kind == PacketKind::data) {
    ++block.data_received;
    upload(pkt, out);
  }

  if (block.data_received == block.data_count) {
    block.done = true;
    return;
  }
  if (block.received < block.data_count) return;

  // Enough packets to decode but some data is missing.
  std::size_t shard_len = 0;
  std::vector<fec::Shard> shards;
  for (std::size_t i = 0; i < block.slots.size(); ++i) {
    if (!block.slots[i]) continue;
    shards.push_back(fec::Shard{i, block.slots[i]->payload});
    if (block.slots[i]->kind == PacketKind::parity) shard_len = block.slots[i]->payload.size();
  }
  const fec::ErasureCode code(block.k, block.r);
  auto recovered = code.reconstruct(shards, block.data_count, shard_len);
  block.done = true;
  if (!recovered) return;

  const Packet& any = *std::find_if(block.slots.begin(), block.slots.end(), [](const PacketPtr& s) {
    return s != nullptr;
  })->get();
  const std::size_t mtu = shard_len;
  for (std::uint16_t i = 0; i < block.data_count; ++i) {
    if (block.slots[i]) continue;
    Packet rebuilt = header_copy(any);
    rebuilt.kind = PacketKind::data;
    rebuilt.index_in_block = i;
    const std::uint32_t first_fragment =
        any.kind == PacketKind::data ? any.fragment_idx - any.index_in_block : any.fragment_idx;
    rebuilt.fragment_idx = first_fragment + i;
    const std::size_t len = drone::fragment_length(rebuilt.frame_bytes, rebuilt.fragment_idx, mtu);
    Bytes& shard = (*recovered)[i];
    shard.resize(std::min(len, shard.size()));
    rebuilt.payload = std::move(shard);
    auto ptr = std::make_shared<const Packet>(std::move(rebuilt));
    block.slots[i] = ptr;
    ++out.repaired;
    ++stats_.fec_repairs;
    upload(ptr, out);
  }
}

void ReceiverNode::upload(const PacketPtr& pkt, ReceiveOutcome& out) {
  if (!in_upload_set()) return;
  ++stats_.uploaded_packets;
  stats_.uploaded_bytes += pkt->payload.size();
  out.uploads.push_back(pkt);
}

void ReceiverNode::collect_expired(SimTime now) {
  // Block ids grow with capture time, so expired blocks sit at the front.
  while (!blocks_.empty()) {
    const BlockState& oldest = blocks_.begin()->second;
    if (now - oldest.capture_ts <= config_.overdue_budget) break;
    blocks_.erase(blocks_.begin());
  }
}

bool ReceiverNode::on_setpoint(const Setpoint& sp) {
  if (setpoint_ && sp.issued_at <= setpoint_->issued_at) return false;
  setpoint_ = sp;
  return true;
}

std::optional<Setpoint> ReceiverNode::control_to_emit() const {
  if (rank_ != 1) return std::nullopt;
  return setpoint_;
}

}  // namespace skygrid::grid
