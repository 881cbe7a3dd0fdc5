#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "skygrid/app/event_log.hpp"
#include "skygrid/app/scenario.hpp"
#include "skygrid/app/trace.hpp"
#include "skygrid/drone/drone.hpp"
#include "skygrid/grid/receiver.hpp"
#include "skygrid/server/server.hpp"
#include "skygrid/server/snapshot.hpp"
#include "skygrid/sim/engine.hpp"
#include "skygrid/sim/radio.hpp"

namespace skygrid::app {

class HeadSource {
 public:
  virtual ~HeadSource() = default;
  virtual server::HeadSample sample(SimTime t) = 0;
  // Times at which the head orientation changes, for motion-to-photon
  // bookkeeping. Sources without a schedule return nothing.
  virtual std::vector<SimTime> step_times() const { return {}; }
};

class TraceHeadSource final : public HeadSource {
 public:
  explicit TraceHeadSource(HeadTrace trace) : trace_(std::move(trace)) {}
  server::HeadSample sample(SimTime t) override { return trace_.sample_at(t); }
  std::vector<SimTime> step_times() const override;

 private:
  HeadTrace trace_;
};

// Holds whatever the operator last sent.
class LiveHeadSource final : public HeadSource {
 public:
  server::HeadSample sample(SimTime t) override {
    server::HeadSample s = latest_;
    s.t = t;
    return s;
  }
  void set(const server::HeadSample& s) { latest_ = s; }
  const server::HeadSample& latest() const noexcept { return latest_; }

 private:
  server::HeadSample latest_;
};

struct WorldHooks {
  std::function<void(const server::StateSnapshot&)> on_snapshot;
  // Every gate recomputation at any receiver: (receiver id, packet whose
  // header position was used, resulting gate).
  std::function<void(std::uint32_t, const Packet&, const std::vector<grid::GateDecision>&)> on_gate;
  std::function<void(const server::DeliveredFrame&)> on_frame;
};

// The whole system wired together on one engine: drone, radio medium,
// receivers, LAN uplink and streaming server, plus the periodic processes
// (capture, flight, render, snapshot) that drive them.
class World {
 public:
  World(Scenario scenario, std::shared_ptr<HeadSource> head, EventSink* log = nullptr,
        WorldHooks hooks = {});

  void run_until(SimTime t_end);
  SimTime now() const noexcept { return engine_.now(); }

  server::StateSnapshot snapshot() const;

  // Head orientation change that did not come from a trace (live input).
  void note_head_step(const server::HeadSample& head);

  const Scenario& scenario() const noexcept { return scenario_; }
  const drone::Drone& drone() const noexcept { return drone_; }
  const std::vector<grid::ReceiverNode>& receivers() const noexcept { return receivers_; }
  const server::StreamingServer& server() const noexcept { return server_; }
  const sim::RadioMedium& medium() const noexcept { return medium_; }
  const sim::Engine& engine() const noexcept { return engine_; }

  std::uint64_t sender_drops() const noexcept { return sender_drops_; }
  std::uint64_t handovers() const noexcept { return handovers_; }

 private:
  void log(const char* entity, const char* kind, Json fields = Json::object());
  void log_rx(std::uint32_t rx, const char* kind, Json fields);

  void schedule_capture(std::uint64_t n);
  void schedule_render(std::uint64_t n);
  void schedule_snapshot(std::uint64_t n);
  void schedule_flight(std::uint64_t n);

  void transmit(PacketPtr pkt);
  void on_radio(std::size_t rx_index, const PacketPtr& pkt);
  void track_gate(const grid::ReceiverNode& node, const Packet& pkt);
  void upload(std::size_t rx_index, const PacketPtr& pkt);
  void on_ingest(std::uint32_t from, const PacketPtr& pkt);
  void render_tick();
  void route(const Setpoint& sp);
  void maybe_start_control(std::size_t rx_index);
  void emit_control(std::size_t rx_index);
  void send_ack(std::size_t rx_index, const Ack& ack);
  std::size_t index_of(std::uint32_t receiver_id) const;

  Scenario scenario_;
  std::shared_ptr<HeadSource> head_;
  EventSink* log_;
  WorldHooks hooks_;

  sim::Engine engine_;
  sim::RadioMedium medium_;
  drone::Drone drone_;
  std::vector<grid::ReceiverNode> receivers_;
  std::vector<sim::RngStream> uplink_rng_;
  std::vector<bool> control_active_;
  server::StreamingServer server_;

  server::HeadSample last_head_;
  std::optional<server::RenderOutcome> last_render_;
  std::optional<std::uint32_t> last_delivered_seq_;
  std::optional<std::uint64_t> gate_seq_;
  std::vector<std::uint32_t> gate_set_;
  std::optional<std::uint32_t> gate_rank1_;
  std::uint64_t sender_drops_ = 0;
  std::uint64_t handovers_ = 0;
};

}  // namespace skygrid::app
