#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "skygrid/grid/gate.hpp"
#include "skygrid/messages.hpp"

namespace skygrid::grid {

enum class Verdict { keep, drop };

// Drops a packet once more than `budget` has passed since its capture.
// Exactly `budget` old is still kept.
Verdict check_overdue(const Packet& pkt, SimTime now, Duration budget);

struct ReceiverConfig {
  ReceiverSite site;
  std::vector<ChannelId> channels;
  Duration overdue_budget{180'000};
  std::uint32_t ack_every = 10;
  std::vector<ReceiverSite> all_sites;
};

struct ReceiveOutcome {
  bool overdue = false;
  bool duplicate = false;
  bool block_done = false;  // arrived after its block was already delivered
  bool malformed = false;
  bool gate_recomputed = false;
  std::uint32_t rank_before = 0;
  std::uint32_t rank_after = 0;
  std::optional<Ack> ack;
  std::vector<PacketPtr> uploads;  // data packets only, in upload order
  std::size_t repaired = 0;
};

struct ReceiverStats {
  std::uint64_t rx_packets = 0;
  std::uint64_t rx_bytes = 0;
  std::uint64_t overdue_drops = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t late_block_drops = 0;
  std::uint64_t fec_repairs = 0;
  std::uint64_t uploaded_packets = 0;
  std::uint64_t uploaded_bytes = 0;
  std::uint64_t acks_sent = 0;
  std::uint64_t ack_counted_packets = 0;
};

// One Wi-Fi grid node.
//
// Every received packet refreshes the node's view of the gate from the drone
// position in its header (newest position by tx_seq wins). Data packets are
// uploaded as they arrive while the node is in the upload set; when a block
// has enough packets but is missing data, the missing data is reconstructed
// and uploaded too. While ranked first the node also counts packets and emits
// an ACK every `ack_every`, and relays the latest control setpoint.
class ReceiverNode {
 public:
  explicit ReceiverNode(ReceiverConfig config);

  ReceiveOutcome on_radio_packet(const PacketPtr& pkt, SimTime now);

  // Latest issued_at wins; returns true if the held setpoint changed.
  bool on_setpoint(const Setpoint& sp);
  // The setpoint to put on air right now, if this node is the emitter.
  std::optional<Setpoint> control_to_emit() const;

  std::uint32_t id() const noexcept { return config_.site.id; }
  const ReceiverSite& site() const noexcept { return config_.site; }
  const ReceiverConfig& config() const noexcept { return config_; }
  std::uint32_t rank() const noexcept { return rank_; }  // 0 until a position is heard
  bool in_upload_set() const noexcept { return rank_ != 0 && rank_ <= kUploadSetSize; }
  const std::vector<GateDecision>& gate() const noexcept { return gate_; }
  std::optional<Vec3> last_drone_position() const { return last_position_; }
  std::uint32_t packets_since_ack() const noexcept { return packets_since_ack_; }
  const ReceiverStats& stats() const noexcept { return stats_; }
  std::size_t buffered_blocks() const noexcept { return blocks_.size(); }

 private:
  struct BlockState {
    SimTime capture_ts{};
    std::uint16_t k = 1;
    std::uint16_t r = 0;
    std::uint16_t data_count = 1;
    std::vector<PacketPtr> slots;
    std::size_t received = 0;
    std::size_t data_received = 0;
    bool done = false;
  };

  void update_gate(const Packet& pkt, SimTime now, ReceiveOutcome& out);
  void count_for_ack(const Packet& pkt, SimTime now, ReceiveOutcome& out);
  void store_and_repair(const PacketPtr& pkt, ReceiveOutcome& out);
  void upload(const PacketPtr& pkt, ReceiveOutcome& out);
  void collect_expired(SimTime now);

  ReceiverConfig config_;
  std::vector<GateDecision> gate_;
  std::uint32_t rank_ = 0;
  std::optional<std::uint64_t> last_position_seq_;
  std::optional<Vec3> last_position_;

  std::uint32_t packets_since_ack_ = 0;
  std::uint64_t bytes_since_ack_ = 0;
  Duration rank1_time_since_ack_{};
  std::optional<SimTime> rank1_since_;

  std::map<std::uint32_t, BlockState> blocks_;
  std::optional<Setpoint> setpoint_;
  ReceiverStats stats_;
};

}  // namespace skygrid::grid
