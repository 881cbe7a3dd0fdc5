#include "skygrid/app/snapshot_json.hpp"

namespace skygrid::app {
namespace {

Json optional_u32(const std::optional<std::uint32_t>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json snapshot_to_json(const server::StateSnapshot& s) {
  Json j;
  j["type"] = "snapshot";
  j["schema_version"] = server::kSnapshotSchemaVersion;
  j["t_ms"] = sim::to_millis(s.t.time_since_epoch());
  j["drone"] = {{"x", s.drone.position.x},
                {"y", s.drone.position.y},
                {"z", s.drone.position.z},
                {"yaw", s.drone.yaw},
                {"gimbal_pitch", s.drone.gimbal_pitch}};
  if (s.setpoint) {
    j["setpoint"] = {{"yaw", s.setpoint->target_yaw},
                     {"gimbal_pitch", s.setpoint->target_gimbal_pitch},
                     {"x", s.setpoint->target_position.x},
                     {"y", s.setpoint->target_position.y},
                     {"z", s.setpoint->target_position.z},
                     {"issued_ms", sim::to_millis(s.setpoint->issued_at.time_since_epoch())}};
  } else {
    j["setpoint"] = nullptr;
  }
  j["head"] = {{"yaw", s.head.yaw}, {"pitch", s.head.pitch}, {"x", s.head.pos.x}, {"y", s.head.pos.y}};
  j["gate"] = s.gate;
  j["rank1"] = optional_u32(s.rank1);

  Json receivers = Json::array();
  for (const server::ReceiverSnapshot& r : s.receivers) {
    receivers.push_back({{"id", r.id},
                         {"x", r.position.x},
                         {"y", r.position.y},
                         {"rank", r.rank},
                         {"in_upload_set", r.in_upload_set},
                         {"rx_packets", r.rx_packets},
                         {"uploaded_packets", r.uploaded_packets},
                         {"uploaded_bytes", r.uploaded_bytes},
                         {"overdue_drops", r.overdue_drops},
                         {"fec_repairs", r.fec_repairs},
                         {"acks_sent", r.acks_sent}});
  }
  j["receivers"] = std::move(receivers);

  j["rate"] = {{"bitrate_bps", s.rate.bitrate_bps},
               {"ewma_goodput_bps", s.rate.ewma_goodput_bps},
               {"has_estimate", s.rate.has_estimate},
               {"in_timeout", s.rate.in_timeout},
               {"acks_applied", s.rate.acks_applied}};
  j["playout"] = {{"delivered", s.playout.delivered},
                  {"skipped", s.playout.skipped},
                  {"freezes", s.playout.freezes},
                  {"duplicates", s.playout.duplicates},
                  {"late_fragments", s.playout.late_fragments},
                  {"corrupt_frames", s.playout.corrupt_frames},
                  {"showing_seq", optional_u32(s.showing_seq)}};
  if (s.window) {
    j["window"] = {{"offset_yaw", s.window->offset_yaw},
                   {"offset_pitch", s.window->offset_pitch},
                   {"saturated_h", s.window->saturated_h},
                   {"saturated_v", s.window->saturated_v},
                   {"margin_h", s.geometry.margin_h()},
                   {"margin_v", s.geometry.margin_v()},
                   {"view_yaw", s.view_yaw},
                   {"view_pitch", s.view_pitch}};
  } else {
    j["window"] = nullptr;
  }
  return j;
}

Json hello_message() {
  Json j;
  j["type"] = "hello";
  j["schema_version"] = server::kSnapshotSchemaVersion;
  return j;
}

Json error_message(const std::string& message) {
  Json j;
  j["type"] = "error";
  j["message"] = message;
  return j;
}

}  // namespace skygrid::app
