#include "skygrid/app/report.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <fstream>

#include "skygrid/app/batch.hpp"

namespace skygrid::app {
namespace {

void write_series(const std::filesystem::path& path, const char* column, const std::vector<SeriesPoint>& series) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ReportError("cannot write " + path.string());
  out << "t_ms," << column << '\n';
  for (const SeriesPoint& p : series) out << fmt::format("{},{}\n", p.t_ms, p.value);
}

}  // namespace

void print_summary(const MetricsReport& r, std::ostream& out) {
  fmt::print(out, "{:<28}{}\n", "frames captured", r.frames_captured);
  fmt::print(out, "{:<28}{}\n", "frames due", r.frames_due);
  fmt::print(out, "{:<28}{}\n", "frames delivered", r.frames_delivered);
  fmt::print(out, "{:<28}{:.4f}\n", "frame delivery ratio", r.frame_delivery_ratio);
  fmt::print(out, "{:<28}{}\n", "frames skipped", r.frames_skipped);
  fmt::print(out, "{:<28}{}\n", "late fragments", r.late_fragments);
  fmt::print(out, "{:<28}{}\n", "freezes", r.freezes);
  fmt::print(out, "{:<28}{}\n", "checksum mismatches", r.checksum_mismatches);
  fmt::print(out, "{:<28}{:.2f} ms\n", "latency mean", r.latency_mean_ms);
  fmt::print(out, "{:<28}{:.2f} ms\n", "latency p95", r.latency_p95_ms);
  fmt::print(out, "{:<28}{}\n", "fec repairs", r.fec_repairs);
  fmt::print(out, "{:<28}{}\n", "sender drops", r.sender_drops);
  fmt::print(out, "{:<28}{}\n", "handovers", r.handovers.size());

  std::size_t resolved = 0;
  double worst = 0.0;
  for (const MotionToPhoton& m : r.motion_to_photon) {
    if (!m.latency_ms) continue;
    ++resolved;
    worst = std::max(worst, *m.latency_ms);
  }
  fmt::print(out, "{:<28}{} steps, {} reflected, worst {:.1f} ms\n", "motion to photon", r.motion_to_photon.size(),
             resolved, worst);

  fmt::print(out, "\n{:>6} {:>10} {:>14} {:>8} {:>9} {:>8} {:>6}\n", "rx", "uploads", "bytes", "dups", "dup ratio",
             "overdue", "fec");
  for (const ReceiverMetrics& m : r.receivers) {
    if (m.uploaded_packets == 0 && m.overdue_drops == 0 && m.fec_repairs == 0) continue;
    fmt::print(out, "{:>6} {:>10} {:>14} {:>8} {:>9.3f} {:>8} {:>6}\n", m.id, m.uploaded_packets, m.uploaded_bytes,
               m.duplicates, m.duplicate_ratio, m.overdue_drops, m.fec_repairs);
  }
}

MetricsReport report(const std::filesystem::path& out_dir, std::ostream& out) {
  const std::filesystem::path events_path = out_dir / kEventLogFile;
  const std::filesystem::path report_path = out_dir / kReportFile;
  for (const auto& p : {events_path, report_path}) {
    if (!std::filesystem::is_regular_file(p)) throw ReportError("missing run artifact: " + p.string());
  }

  std::ifstream events(events_path, std::ios::binary);
  MetricsReport recomputed;
  try {
    recomputed = compute_metrics(events, events_path.string());
  } catch (const std::exception& e) {
    throw ReportError(std::string("corrupted event log: ") + e.what());
  }

  std::ifstream stored_in(report_path, std::ios::binary);
  Json stored;
  try {
    stored = Json::parse(stored_in);
  } catch (const std::exception& e) {
    throw ReportError("corrupted report " + report_path.string() + ": " + e.what());
  }
  if (stored != recomputed.to_json()) {
    throw ReportError(report_path.string() + " does not match the metrics recomputed from " + events_path.string());
  }

  print_summary(recomputed, out);

  const std::filesystem::path series_dir = out_dir / "series";
  std::filesystem::create_directories(series_dir);
  write_series(series_dir / "bitrate.csv", "bitrate_bps", recomputed.bitrate_series);
  write_series(series_dir / "goodput.csv", "goodput_bps", recomputed.goodput_series);
  write_series(series_dir / "frame_latency.csv", "latency_ms", recomputed.frame_latency_series);
  return recomputed;
}

}  // namespace skygrid::app
