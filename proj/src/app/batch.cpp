#include "skygrid/app/batch.hpp"

#include <fstream>
#include <memory>
#include <stdexcept>

#include "skygrid/app/snapshot_json.hpp"
#include "skygrid/app/world.hpp"

namespace skygrid::app {
namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

}  // namespace

MetricsReport run_batch(const Scenario& scenario, const HeadTrace& trace, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path events_path = out_dir / kEventLogFile;
  {
    std::ofstream events = open_out(events_path);
    std::ofstream snapshots = open_out(out_dir / kSnapshotFile);
    NdjsonEventLog log(events);

    const SimTime end{scenario.duration};
    WorldHooks hooks;
    hooks.on_snapshot = [&snapshots, end](const server::StateSnapshot& s) {
      if (s.t < end) snapshots << snapshot_to_json(s).dump() << '\n';
    };
    World world(scenario, std::make_shared<TraceHeadSource>(trace), &log, std::move(hooks));
    world.run_until(end);
    events.flush();
    snapshots.flush();
    if (!events || !snapshots) throw std::runtime_error("write failed in " + out_dir.string());
  }

  std::ifstream events(events_path, std::ios::binary);
  MetricsReport report = compute_metrics(events, events_path.string());
  std::ofstream out = open_out(out_dir / kReportFile);
  out << report.to_json().dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + (out_dir / kReportFile).string());
  return report;
}

}  // namespace skygrid::app
