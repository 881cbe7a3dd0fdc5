#include "skygrid/app/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skygrid/geometry.hpp"

namespace skygrid::app {
namespace {

double ms_of(std::int64_t us) { return static_cast<double>(us) / 1000.0; }

Json series_json(const std::vector<SeriesPoint>& series) {
  Json out = Json::array();
  for (const SeriesPoint& p : series) out.push_back({p.t_ms, p.value});
  return out;
}

}  // namespace

void MetricsAccumulator::consume(const Json& ev) {
  const std::string& kind = ev.at("kind").get_ref<const std::string&>();
  const std::int64_t t_us = ev.at("t_us").get<std::int64_t>();
  const double t_ms = ms_of(t_us);

  if (kind == "config") {
    budget_us_ = ev.at("budget_us").get<std::int64_t>();
    for (const Json& id : ev.at("receivers")) {
      ReceiverMetrics m;
      m.id = id.get<std::uint32_t>();
      receivers_[m.id] = m;
    }
  } else if (kind == "capture") {
    const auto seq = ev.at("frame_seq").get<std::uint32_t>();
    if (seq != capture_us_.size()) throw std::runtime_error("capture frame_seq out of sequence");
    capture_us_.push_back(t_us);
    capture_checksum_.push_back(ev.at("checksum").get<std::uint32_t>());
    ++acc_.frames_captured;
    acc_.bitrate_series.push_back({t_ms, ev.at("bitrate_bps").get<double>()});
  } else if (kind == "ack_applied") {
    acc_.goodput_series.push_back({t_ms, ev.at("sample_bps").get<double>()});
  } else if (kind == "tx_drop") {
    ++acc_.sender_drops;
  } else if (kind == "upload") {
    ReceiverMetrics& m = receivers_[ev.at("rx").get<std::uint32_t>()];
    ++m.uploaded_packets;
    m.uploaded_bytes += ev.at("bytes").get<std::uint64_t>();
  } else if (kind == "dup") {
    ++receivers_[ev.at("rx").get<std::uint32_t>()].duplicates;
  } else if (kind == "overdue") {
    ++receivers_[ev.at("rx").get<std::uint32_t>()].overdue_drops;
  } else if (kind == "fec_repair") {
    const auto count = ev.at("count").get<std::uint64_t>();
    receivers_[ev.at("rx").get<std::uint32_t>()].fec_repairs += count;
    acc_.fec_repairs += count;
  } else if (kind == "late") {
    ++acc_.late_fragments;
  } else if (kind == "frame_corrupt") {
    ++acc_.checksum_mismatches;
  } else if (kind == "handover") {
    Handover h;
    h.t_ms = t_ms;
    h.from = ev.at("from").get<std::vector<std::uint32_t>>();
    h.to = ev.at("to").get<std::vector<std::uint32_t>>();
    h.rank1 = ev.at("rank1").get<std::uint32_t>();
    acc_.handovers.push_back(std::move(h));
  } else if (kind == "head_step") {
    pending_steps_.push_back({t_ms, acc_.motion_to_photon.size()});
    acc_.motion_to_photon.push_back({t_ms, std::nullopt});
  } else if (kind == "render") {
    last_render_us_ = t_us;
    if (!ev.at("frame_seq").is_null()) {
      const auto seq = ev.at("frame_seq").get<std::uint32_t>();
      ++acc_.frames_delivered;
      if (seq >= capture_checksum_.size() || capture_checksum_[seq] != ev.at("checksum").get<std::uint32_t>()) {
        ++acc_.checksum_mismatches;
      }
      const double latency = ms_of(ev.at("e2e_us").get<std::int64_t>());
      latencies_ms_.push_back(latency);
      acc_.frame_latency_series.push_back({t_ms, latency});
    }
    if (ev.at("freeze").get<bool>()) ++acc_.freezes;
    if (!pending_steps_.empty() && ev.contains("view_yaw")) {
      const double dyaw = shortest_angle(ev.at("head_yaw").get<double>(), ev.at("view_yaw").get<double>());
      const double dpitch = ev.at("head_pitch").get<double>() - ev.at("view_pitch").get<double>();
      if (std::abs(dyaw) <= kViewMatchToleranceDeg && std::abs(dpitch) <= kViewMatchToleranceDeg) {
        for (const PendingStep& p : pending_steps_) acc_.motion_to_photon[p.index].latency_ms = t_ms - p.t_ms;
        pending_steps_.clear();
      }
    }
  }
}

MetricsReport MetricsAccumulator::finish() const {
  MetricsReport r = acc_;
  if (last_render_us_) {
    for (std::int64_t c : capture_us_) {
      if (c + budget_us_ <= *last_render_us_) ++r.frames_due;
    }
  }
  r.frames_skipped = r.frames_due > r.frames_delivered ? r.frames_due - r.frames_delivered : 0;
  r.frame_delivery_ratio =
      r.frames_due == 0 ? 0.0 : static_cast<double>(r.frames_delivered) / static_cast<double>(r.frames_due);

  if (!latencies_ms_.empty()) {
    double sum = 0.0;
    for (double l : latencies_ms_) sum += l;
    r.latency_mean_ms = sum / static_cast<double>(latencies_ms_.size());
    std::vector<double> sorted = latencies_ms_;
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
    r.latency_p95_ms = sorted[std::max<std::size_t>(rank, 1) - 1];
  }

  for (const auto& [id, m] : receivers_) {
    ReceiverMetrics out = m;
    out.duplicate_ratio =
        m.uploaded_packets == 0 ? 0.0 : static_cast<double>(m.duplicates) / static_cast<double>(m.uploaded_packets);
    r.receivers.push_back(out);
  }
  return r;
}

Json MetricsReport::to_json() const {
  Json j;
  j["frames_captured"] = frames_captured;
  j["frames_due"] = frames_due;
  j["frames_delivered"] = frames_delivered;
  j["frames_skipped"] = frames_skipped;
  j["late_fragments"] = late_fragments;
  j["freezes"] = freezes;
  j["checksum_mismatches"] = checksum_mismatches;
  j["frame_delivery_ratio"] = frame_delivery_ratio;
  j["latency_mean_ms"] = latency_mean_ms;
  j["latency_p95_ms"] = latency_p95_ms;
  j["fec_repairs"] = fec_repairs;
  j["sender_drops"] = sender_drops;

  Json rx = Json::array();
  for (const ReceiverMetrics& m : receivers) {
    rx.push_back({{"id", m.id},
                  {"uploaded_packets", m.uploaded_packets},
                  {"uploaded_bytes", m.uploaded_bytes},
                  {"duplicates", m.duplicates},
                  {"duplicate_ratio", m.duplicate_ratio},
                  {"overdue_drops", m.overdue_drops},
                  {"fec_repairs", m.fec_repairs}});
  }
  j["receivers"] = std::move(rx);

  Json mtp = Json::array();
  for (const MotionToPhoton& m : motion_to_photon) {
    mtp.push_back({{"t_ms", m.t_ms}, {"latency_ms", m.latency_ms ? Json(*m.latency_ms) : Json(nullptr)}});
  }
  j["motion_to_photon"] = std::move(mtp);

  Json ho = Json::array();
  for (const Handover& h : handovers) {
    ho.push_back({{"t_ms", h.t_ms}, {"from", h.from}, {"to", h.to},
                  {"rank1", h.rank1 ? Json(*h.rank1) : Json(nullptr)}});
  }
  j["handovers"] = std::move(ho);

  j["series"] = {{"bitrate_bps", series_json(bitrate_series)},
                 {"goodput_bps", series_json(goodput_series)},
                 {"frame_latency_ms", series_json(frame_latency_series)}};
  return j;
}

MetricsReport compute_metrics(std::istream& events, const std::string& source) {
  MetricsAccumulator acc;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(events, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      acc.consume(Json::parse(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (events.bad()) throw std::runtime_error(source + ": read error");
  return acc.finish();
}

}  // namespace skygrid::app
