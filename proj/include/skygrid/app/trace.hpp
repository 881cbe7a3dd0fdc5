#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "skygrid/server/view.hpp"

namespace skygrid::app {

inline constexpr const char* kTraceHeader = "t_ms,yaw_deg,pitch_deg,x_m,y_m";

struct TraceSample {
  std::int64_t t_ms = 0;
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double x_m = 0.0;
  double y_m = 0.0;
};

// Recorded head motion. Samples are strictly increasing in time starting at
// t = 0; values between samples are interpolated linearly (yaw the short
// way round) and held after the last sample. An empty trace is a viewer
// standing still at the centre looking at yaw 0.
class HeadTrace {
 public:
  HeadTrace() = default;
  explicit HeadTrace(std::vector<TraceSample> samples);

  // CSV with the exact header row kTraceHeader. Errors name `source:line`.
  static HeadTrace parse(std::istream& in, const std::string& source = "trace");
  static HeadTrace load(const std::filesystem::path& path);

  server::HeadSample sample_at(SimTime t) const;

  const std::vector<TraceSample>& samples() const noexcept { return samples_; }
  bool empty() const noexcept { return samples_.empty(); }

 private:
  std::vector<TraceSample> samples_;
};

}  // namespace skygrid::app
