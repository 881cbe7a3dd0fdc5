#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>

#include "skygrid/app/metrics.hpp"

namespace skygrid::app {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Recomputes the report of a completed run from its event log, checks it
// against the stored report.json, prints a summary table and writes
// plot-ready CSV series under out_dir/series/.
MetricsReport report(const std::filesystem::path& out_dir, std::ostream& out);

void print_summary(const MetricsReport& report, std::ostream& out);

}  // namespace skygrid::app
