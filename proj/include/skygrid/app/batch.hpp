#pragma once

#include <filesystem>

#include "skygrid/app/metrics.hpp"
#include "skygrid/app/scenario.hpp"
#include "skygrid/app/trace.hpp"

namespace skygrid::app {

inline constexpr const char* kEventLogFile = "events.ndjson";
inline constexpr const char* kSnapshotFile = "snapshots.ndjson";
inline constexpr const char* kReportFile = "report.json";

// Runs the scenario for its full duration and writes the event log, the
// snapshot stream and report.json (computed back from the event log) into
// out_dir. Throws InvariantViolation if the simulation breaks an invariant.
MetricsReport run_batch(const Scenario& scenario, const HeadTrace& trace,
                        const std::filesystem::path& out_dir);

}  // namespace skygrid::app
