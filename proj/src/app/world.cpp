#include "skygrid/app/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "skygrid/error.hpp"

namespace skygrid::app {
namespace {

constexpr sim::EntityId kWorldEntity{0};
constexpr sim::EntityId kDroneEntity{1};
constexpr sim::EntityId kServerEntity{2};
constexpr sim::EntityId kHeadEntity{3};

sim::EntityId receiver_entity(std::uint32_t id) { return sim::EntityId{100 + id}; }

const Scenario& validated(const Scenario& sc) {
  sc.validate();
  return sc;
}

std::vector<sim::RadioSite> radio_sites(const Scenario& sc) {
  std::vector<sim::RadioSite> out;
  for (const grid::ReceiverSite& s : sc.receiver_sites()) {
    out.push_back({s.id, {s.position.x, s.position.y, 0.0}, sc.radio.channels});
  }
  return out;
}

drone::DroneConfig drone_config(const Scenario& sc) {
  drone::DroneConfig c;
  c.mtu = sc.video.mtu;
  c.fps = sc.video.fps;
  c.fec_k = static_cast<std::uint16_t>(sc.fec.k);
  c.fec_r = static_cast<std::uint16_t>(sc.fec.r);
  c.channels = sc.radio.channels;
  c.rate = sc.rate;
  c.limits = sc.flight;
  c.initial_pose.position = sc.origin_at(SimTime{});
  c.payload_seed = sc.seed;
  return c;
}

server::ServerConfig server_config(const Scenario& sc) {
  server::ServerConfig c;
  c.playout_budget = sc.playout.budget;
  c.view = sc.view;
  c.position_gain = sc.control.position_gain;
  c.limits = sc.flight;
  c.sites = sc.receiver_sites();
  c.home = sc.origin_at(SimTime{});
  return c;
}

Duration period_of(double hz) { return Duration{std::llround(1e6 / hz)}; }

const char* kind_name(PacketKind kind) { return kind == PacketKind::data ? "data" : "parity"; }

}  // namespace

std::vector<SimTime> TraceHeadSource::step_times() const {
  std::vector<SimTime> out;
  const auto& s = trace_.samples();
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i].yaw_deg != s[i - 1].yaw_deg || s[i].pitch_deg != s[i - 1].pitch_deg) {
      out.push_back(sim::from_us(s[i].t_ms * 1000));
    }
  }
  return out;
}

World::World(Scenario scenario, std::shared_ptr<HeadSource> head, EventSink* sink, WorldHooks hooks)
    : scenario_(validated(scenario)),
      head_(head ? std::move(head) : std::make_shared<TraceHeadSource>(HeadTrace{})),
      log_(sink),
      hooks_(std::move(hooks)),
      medium_(scenario_.radio, scenario_.seed, radio_sites(scenario_)),
      drone_(drone_config(scenario_), SimTime{}),
      server_(server_config(scenario_)) {
  const auto sites = scenario_.receiver_sites();
  for (const grid::ReceiverSite& s : sites) {
    grid::ReceiverConfig rc;
    rc.site = s;
    rc.channels = scenario_.radio.channels;
    rc.overdue_budget = scenario_.playout.overdue_budget();
    rc.all_sites = sites;
    receivers_.emplace_back(std::move(rc));
    uplink_rng_.emplace_back(sim::derive_seed(scenario_.seed, sim::stream_key(sim::StreamPurpose::uplink, s.id)));
  }
  control_active_.assign(receivers_.size(), false);
  last_head_ = head_->sample(SimTime{});

  Json ids = Json::array();
  for (const grid::ReceiverSite& s : sites) ids.push_back(s.id);
  log("world", "config",
      {{"seed", scenario_.seed},
       {"duration_us", scenario_.duration.count()},
       {"budget_us", scenario_.playout.budget.count()},
       {"overdue_budget_us", scenario_.playout.overdue_budget().count()},
       {"fps", scenario_.video.fps},
       {"render_hz", scenario_.playout.render_hz},
       {"fec_k", scenario_.fec.k},
       {"fec_r", scenario_.fec.r},
       {"channels", scenario_.radio.channels},
       {"receivers", ids}});

  for (const CapacityStep& step : scenario_.capacity_steps) {
    engine_.schedule(sim::from_us(step.t_ms * 1000), kWorldEntity, "capacity_step", [this, step] {
      medium_.set_channel_capacity(step.capacity_bps);
      log("radio", "capacity", {{"capacity_bps", step.capacity_bps}});
    });
  }
  for (SimTime t : head_->step_times()) {
    engine_.schedule(t, kHeadEntity, "head_step", [this] { note_head_step(head_->sample(engine_.now())); });
  }
  schedule_capture(0);
  schedule_flight(1);
  schedule_render(0);
  schedule_snapshot(0);
}

void World::run_until(SimTime t_end) { engine_.run_until(t_end); }

void World::log(const char* entity, const char* kind, Json fields) {
  if (!log_) return;
  Json record;
  record["t_us"] = sim::to_us(engine_.now());
  record["entity"] = entity;
  record["kind"] = kind;
  for (auto& [key, value] : fields.items()) {
    if (record.contains(key)) throw std::logic_error(std::string("event field clashes with header: ") + key);
    record[key] = std::move(value);
  }
  log_->record(record);
}

void World::log_rx(std::uint32_t rx, const char* kind, Json fields) {
  if (!log_) return;
  fields["rx"] = rx;
  const std::string entity = "rx" + std::to_string(rx);
  log(entity.c_str(), kind, std::move(fields));
}

std::size_t World::index_of(std::uint32_t receiver_id) const {
  for (std::size_t i = 0; i < receivers_.size(); ++i) {
    if (receivers_[i].id() == receiver_id) return i;
  }
  throw InvariantViolation("unknown receiver id " + std::to_string(receiver_id));
}

void World::schedule_capture(std::uint64_t n) {
  engine_.schedule(sim::cadence_tick(n, scenario_.video.fps), kDroneEntity, "capture", [this, n] {
    drone::Drone::FrameOutput out = drone_.produce_frame(engine_.now());
    log("drone", "capture",
        {{"frame_seq", out.frame.frame_seq},
         {"bytes", out.frame.payload.size()},
         {"checksum", out.frame.checksum},
         {"packets", out.packets.size()},
         {"bitrate_bps", drone_.rate().bitrate()},
         {"ewma_bps", drone_.rate().ewma_goodput()},
         {"has_estimate", drone_.rate().has_estimate()},
         {"camera_yaw", out.frame.camera_yaw}});
    for (Packet& p : out.packets) transmit(std::make_shared<const Packet>(std::move(p)));
    schedule_capture(n + 1);
  });
}

void World::schedule_flight(std::uint64_t n) {
  const double hz = scenario_.control.flight_step_hz;
  engine_.schedule(sim::cadence_tick(n, hz), kDroneEntity, "flight", [this, n, hz] {
    const double dt = sim::to_seconds(sim::cadence_tick(n, hz) - sim::cadence_tick(n - 1, hz));
    drone_.step_flight(dt);
    schedule_flight(n + 1);
  });
}

void World::schedule_render(std::uint64_t n) {
  engine_.schedule(sim::cadence_tick(n, scenario_.playout.render_hz), kServerEntity, "render", [this, n] {
    render_tick();
    schedule_render(n + 1);
  });
}

void World::schedule_snapshot(std::uint64_t n) {
  engine_.schedule(sim::cadence_tick(n, scenario_.snapshot_hz), kServerEntity, "snapshot", [this, n] {
    if (hooks_.on_snapshot) hooks_.on_snapshot(snapshot());
    schedule_snapshot(n + 1);
  });
}

// A packet that cannot finish serializing before the receivers' overdue
// budget runs out would only be dropped on arrival, so it never goes on air.
void World::transmit(PacketPtr pkt) {
  const SimTime now = engine_.now();
  const SimTime start = std::max(now, medium_.channel_free_at(pkt->channel));
  const SimTime end = start + medium_.model().serialization_delay(pkt->payload.size());
  if (end - pkt->capture_ts > scenario_.playout.overdue_budget()) {
    ++sender_drops_;
    log("drone", "tx_drop",
        {{"frame_seq", pkt->frame_seq}, {"block", pkt->block_id}, {"index", pkt->index_in_block},
         {"channel", pkt->channel}});
    return;
  }

  sim::Transmission tx = medium_.broadcast(pkt->channel, pkt->payload.size(), pkt->drone_pos, now);
  log("radio", "tx",
      {{"frame_seq", pkt->frame_seq},
       {"block", pkt->block_id},
       {"index", pkt->index_in_block},
       {"packet", kind_name(pkt->kind)},
       {"channel", tx.channel},
       {"bytes", pkt->payload.size()},
       {"start_us", sim::to_us(tx.start)},
       {"end_us", sim::to_us(tx.end)},
       {"heard_by", tx.deliveries.size()}});
  for (const sim::Delivery& d : tx.deliveries) {
    const std::size_t idx = index_of(d.receiver);
    engine_.schedule(d.arrival, receiver_entity(d.receiver), "radio_rx", [this, idx, pkt] { on_radio(idx, pkt); });
  }
}

void World::on_radio(std::size_t rx_index, const PacketPtr& pkt) {
  grid::ReceiverNode& node = receivers_[rx_index];
  grid::ReceiveOutcome out = node.on_radio_packet(pkt, engine_.now());

  if (out.gate_recomputed) track_gate(node, *pkt);
  if (out.overdue) {
    log_rx(node.id(), "overdue", {{"frame_seq", pkt->frame_seq}, {"block", pkt->block_id}, {"index", pkt->index_in_block}});
  }
  if (out.repaired > 0) log_rx(node.id(), "fec_repair", {{"block", pkt->block_id}, {"count", out.repaired}});
  for (const PacketPtr& u : out.uploads) upload(rx_index, u);
  if (out.ack) send_ack(rx_index, *out.ack);
  if (out.rank_before != 1 && out.rank_after == 1) maybe_start_control(rx_index);
}

void World::track_gate(const grid::ReceiverNode& node, const Packet& pkt) {
  if (hooks_.on_gate) hooks_.on_gate(node.id(), pkt, node.gate());
  if (gate_seq_ && pkt.tx_seq <= *gate_seq_) return;
  gate_seq_ = pkt.tx_seq;

  std::vector<std::uint32_t> set = grid::upload_set(node.gate());
  std::sort(set.begin(), set.end());
  const std::uint32_t rank1 = node.gate().front().receiver_id;
  if (set == gate_set_ && gate_rank1_ == rank1) return;
  if (!gate_set_.empty()) {
    ++handovers_;
    log("world", "handover",
        {{"from", gate_set_}, {"to", set}, {"rank1_from", *gate_rank1_}, {"rank1", rank1},
         {"x", pkt.drone_pos.x}, {"y", pkt.drone_pos.y}});
  }
  gate_set_ = std::move(set);
  gate_rank1_ = rank1;
}

void World::upload(std::size_t rx_index, const PacketPtr& pkt) {
  if (pkt->kind != PacketKind::data) throw InvariantViolation("receiver tried to upload a parity packet");
  const std::uint32_t id = receivers_[rx_index].id();
  log_rx(id, "upload", {{"frame_seq", pkt->frame_seq}, {"fragment", pkt->fragment_idx}, {"bytes", pkt->payload.size()}});
  if (uplink_rng_[rx_index].bernoulli(scenario_.uplink.loss)) {
    log_rx(id, "uplink_loss", {{"frame_seq", pkt->frame_seq}, {"fragment", pkt->fragment_idx}});
    return;
  }
  engine_.schedule_after(scenario_.uplink.latency, kServerEntity, "ingest", [this, id, pkt] { on_ingest(id, pkt); });
}

void World::on_ingest(std::uint32_t from, const PacketPtr& pkt) {
  if (pkt->kind != PacketKind::data) throw InvariantViolation("parity packet reached the server");
  const server::IngestOutcome out = server_.ingest(*pkt, from, engine_.now());
  switch (out.result) {
    case server::IngestResult::duplicate:
      log("server", "dup", {{"rx", from}, {"frame_seq", pkt->frame_seq}, {"fragment", pkt->fragment_idx}});
      break;
    case server::IngestResult::late:
      log("server", "late", {{"rx", from}, {"frame_seq", pkt->frame_seq}, {"fragment", pkt->fragment_idx}});
      break;
    case server::IngestResult::completed:
      log("server", "frame_complete",
          {{"frame_seq", pkt->frame_seq}, {"age_us", (engine_.now() - pkt->capture_ts).count()}});
      break;
    case server::IngestResult::corrupt:
      log("server", "frame_corrupt", {{"frame_seq", pkt->frame_seq}});
      break;
    case server::IngestResult::rejected:
      throw InvariantViolation("server rejected a malformed data packet");
    case server::IngestResult::stored:
      break;
  }
  if (out.route_changed) {
    log("server", "route", {{"to", server_.route_target()}});
    if (server_.latest_setpoint()) route(*server_.latest_setpoint());
  }
}

void World::render_tick() {
  const SimTime now = engine_.now();
  last_head_ = head_->sample(now);
  server::RenderOutcome r = server_.render(now, last_head_);

  Json fields;
  if (r.playout.delivered) {
    const server::DeliveredFrame& f = *r.playout.delivered;
    if (last_delivered_seq_ && f.meta.frame_seq <= *last_delivered_seq_) {
      throw InvariantViolation("frame " + std::to_string(f.meta.frame_seq) + " delivered out of order");
    }
    last_delivered_seq_ = f.meta.frame_seq;
    fields["frame_seq"] = f.meta.frame_seq;
    fields["checksum"] = f.meta.checksum;
    fields["e2e_us"] = (now - f.meta.capture_ts).count();
    if (hooks_.on_frame) hooks_.on_frame(f);
  } else {
    fields["frame_seq"] = nullptr;
  }
  fields["freeze"] = r.playout.freeze;
  fields["skipped"] = r.playout.skipped.size();
  fields["head_yaw"] = last_head_.yaw;
  fields["head_pitch"] = last_head_.pitch;
  if (r.shown) {
    const auto& v = scenario_.view;
    if (std::abs(r.window.offset_yaw) > v.margin_h() || std::abs(r.window.offset_pitch) > v.margin_v()) {
      throw InvariantViolation("display window outside the captured frame");
    }
    fields["shown_seq"] = r.shown->frame_seq;
    fields["camera_yaw"] = r.shown->camera_yaw;
    fields["offset_yaw"] = r.window.offset_yaw;
    fields["offset_pitch"] = r.window.offset_pitch;
    fields["saturated_h"] = r.window.saturated_h;
    fields["saturated_v"] = r.window.saturated_v;
    fields["view_yaw"] = r.view_yaw;
    fields["view_pitch"] = r.view_pitch;
  }
  log("server", "render", std::move(fields));
  last_render_ = std::move(r);
  last_render_->playout.delivered.reset();

  if (auto sp = server_.update_control(last_head_, scenario_.origin_at(now), now)) route(*sp);
}

void World::route(const Setpoint& sp) {
  const std::size_t idx = index_of(server_.route_target());
  engine_.schedule_after(scenario_.uplink.latency, receiver_entity(receivers_[idx].id()), "setpoint_rx",
                         [this, idx, sp] {
                           receivers_[idx].on_setpoint(sp);
                           maybe_start_control(idx);
                         });
}

void World::maybe_start_control(std::size_t rx_index) {
  if (control_active_[rx_index] || !receivers_[rx_index].control_to_emit()) return;
  control_active_[rx_index] = true;
  emit_control(rx_index);
}

// Repeats the held setpoint at the control rate for as long as this node is
// rank 1; a newer setpoint simply replaces what the next repeat sends.
void World::emit_control(std::size_t rx_index) {
  const grid::ReceiverNode& node = receivers_[rx_index];
  const std::optional<Setpoint> sp = node.control_to_emit();
  if (!sp) {
    control_active_[rx_index] = false;
    return;
  }
  const SimTime now = engine_.now();
  if (auto arrival = medium_.downlink(node.id(), drone_.pose().position, kSetpointWireBytes, now)) {
    const std::uint32_t from = node.id();
    engine_.schedule(*arrival, kDroneEntity, "setpoint_apply", [this, sp, from] {
      if (drone_.on_setpoint(*sp)) {
        log("drone", "setpoint_applied",
            {{"rx", from}, {"yaw", sp->target_yaw}, {"gimbal_pitch", sp->target_gimbal_pitch},
             {"issued_us", sim::to_us(sp->issued_at)}});
      }
    });
  }
  engine_.schedule_after(period_of(scenario_.control.repeat_hz), receiver_entity(node.id()), "control_repeat",
                         [this, rx_index] { emit_control(rx_index); });
}

void World::send_ack(std::size_t rx_index, const Ack& ack) {
  const grid::ReceiverNode& node = receivers_[rx_index];
  const auto arrival = medium_.downlink(node.id(), drone_.pose().position, kAckWireBytes, engine_.now());
  log_rx(node.id(), "ack",
         {{"bytes", ack.bytes_received}, {"span_us", ack.span.count()}, {"delivered", arrival.has_value()}});
  if (!arrival) return;
  engine_.schedule(*arrival, kDroneEntity, "ack_apply", [this, ack] {
    if (drone_.on_ack(ack, engine_.now())) {
      log("drone", "ack_applied",
          {{"rx", ack.receiver_id},
           {"sample_bps", static_cast<double>(ack.bytes_received) * 8.0 / sim::to_seconds(ack.span)},
           {"ewma_bps", drone_.rate().ewma_goodput()}});
    }
  });
}

void World::note_head_step(const server::HeadSample& head) {
  log("head", "head_step", {{"yaw", head.yaw}, {"pitch", head.pitch}});
}

server::StateSnapshot World::snapshot() const {
  server::StateSnapshot s;
  s.t = engine_.now();
  s.drone = drone_.pose();
  s.setpoint = drone_.setpoint();
  s.head = head_->sample(engine_.now());
  s.gate = gate_set_;
  s.rank1 = gate_rank1_;
  for (const grid::ReceiverNode& node : receivers_) {
    const grid::ReceiverStats& st = node.stats();
    s.receivers.push_back({node.id(), node.site().position, node.rank(), node.in_upload_set(), st.rx_packets,
                           st.uploaded_packets, st.uploaded_bytes, st.overdue_drops, st.fec_repairs, st.acks_sent});
  }
  const drone::RateController& rate = drone_.rate();
  s.rate = {rate.bitrate(), rate.ewma_goodput(), rate.has_estimate(), rate.in_timeout(), rate.acks_applied()};
  s.playout = server_.buffer().stats();
  s.geometry = scenario_.view;
  if (last_render_ && last_render_->shown) {
    s.showing_seq = last_render_->shown->frame_seq;
    s.window = last_render_->window;
    s.view_yaw = last_render_->view_yaw;
    s.view_pitch = last_render_->view_pitch;
  }
  return s;
}

}  // namespace skygrid::app
