#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "skygrid/drone/flight.hpp"
#include "skygrid/grid/gate.hpp"
#include "skygrid/server/reassembly.hpp"
#include "skygrid/server/view.hpp"

namespace skygrid::server {

struct ServerConfig {
  Duration playout_budget{200'000};
  ViewGeometry view;
  double position_gain = 10.0;
  drone::FlightLimits limits;
  std::vector<grid::ReceiverSite> sites;
  Vec3 home;
};

struct IngestOutcome {
  IngestResult result = IngestResult::stored;
  bool route_changed = false;
};

struct RenderOutcome {
  PlayoutResult playout;
  std::optional<FrameMeta> shown;  // frame on screen after this tick
  DisplayWindow window;
  double view_yaw = 0.0;
  double view_pitch = 0.0;
};

// Streaming server: reassembly and playout, display-window placement,
// head-to-setpoint mapping and control routing to the receiver closest to
// the drone.
class StreamingServer {
 public:
  explicit StreamingServer(ServerConfig config);

  IngestOutcome ingest(const Packet& pkt, std::uint32_t from, SimTime now);

  // One render tick: play out, then place the window for `head` against the
  // frame being shown.
  RenderOutcome render(SimTime now, const HeadSample& head);

  // Derives the setpoint for `head`; returns it only when it differs from the
  // last one issued.
  std::optional<Setpoint> update_control(const HeadSample& head, Vec3 origin, SimTime now);

  // Receiver that control should be sent to: rank 1 for the newest drone
  // position seen in uploads, or nearest to home before any upload.
  std::uint32_t route_target() const noexcept { return route_target_; }

  const std::optional<Setpoint>& latest_setpoint() const noexcept { return setpoint_; }
  const std::optional<Vec3>& known_drone_position() const noexcept { return drone_position_; }
  const std::optional<DisplayWindow>& window() const noexcept { return window_; }
  const ReassemblyBuffer& buffer() const noexcept { return buffer_; }
  const ServerConfig& config() const noexcept { return config_; }

 private:
  std::uint32_t rank1_for(Vec3 position) const;

  ServerConfig config_;
  ReassemblyBuffer buffer_;
  std::optional<std::uint64_t> position_seq_;
  std::optional<Vec3> drone_position_;
  std::uint32_t route_target_ = 0;
  std::optional<Setpoint> setpoint_;
  std::optional<DisplayWindow> window_;
};

}  // namespace skygrid::server
