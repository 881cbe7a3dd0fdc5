#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skygrid/app/event_log.hpp"

namespace skygrid::app {

struct ReceiverMetrics {
  std::uint32_t id = 0;
  std::uint64_t uploaded_packets = 0;
  std::uint64_t uploaded_bytes = 0;
  std::uint64_t duplicates = 0;  // uploads that the server had already seen
  double duplicate_ratio = 0.0;
  std::uint64_t overdue_drops = 0;
  std::uint64_t fec_repairs = 0;
};

struct MotionToPhoton {
  double t_ms = 0.0;
  std::optional<double> latency_ms;  // empty if the view never caught up
};

struct SeriesPoint {
  double t_ms = 0.0;
  double value = 0.0;
};

struct Handover {
  double t_ms = 0.0;
  std::vector<std::uint32_t> from;
  std::vector<std::uint32_t> to;
  std::optional<std::uint32_t> rank1;
};

// Run summary. Every field is a pure function of the event log.
struct MetricsReport {
  std::uint64_t frames_captured = 0;
  std::uint64_t frames_due = 0;
  std::uint64_t frames_delivered = 0;
  std::uint64_t frames_skipped = 0;
  std::uint64_t late_fragments = 0;
  std::uint64_t freezes = 0;
  std::uint64_t checksum_mismatches = 0;
  double frame_delivery_ratio = 0.0;
  double latency_mean_ms = 0.0;
  double latency_p95_ms = 0.0;
  std::uint64_t fec_repairs = 0;
  std::uint64_t sender_drops = 0;
  std::vector<ReceiverMetrics> receivers;
  std::vector<MotionToPhoton> motion_to_photon;
  std::vector<SeriesPoint> bitrate_series;
  std::vector<SeriesPoint> goodput_series;
  std::vector<SeriesPoint> frame_latency_series;
  std::vector<Handover> handovers;

  Json to_json() const;
};

// Angular tolerance for "the rendered view reflects the head", degrees.
inline constexpr double kViewMatchToleranceDeg = 0.01;

// Folds event records, in log order, into a MetricsReport.
class MetricsAccumulator {
 public:
  void consume(const Json& event);
  MetricsReport finish() const;

 private:
  struct PendingStep {
    double t_ms;
    std::size_t index;
  };

  std::int64_t budget_us_ = 0;
  std::vector<std::int64_t> capture_us_;
  std::vector<std::uint32_t> capture_checksum_;
  std::optional<std::int64_t> last_render_us_;
  MetricsReport acc_;
  std::map<std::uint32_t, ReceiverMetrics> receivers_;
  std::vector<double> latencies_ms_;
  std::vector<PendingStep> pending_steps_;
};

// Reads an NDJSON event log. Throws std::runtime_error naming `source` and
// the line on malformed input.
MetricsReport compute_metrics(std::istream& events, const std::string& source);

}  // namespace skygrid::app
