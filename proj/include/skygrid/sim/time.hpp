#pragma once

#include <chrono>
#include <cstdint>

namespace skygrid::sim {

using Duration = std::chrono::microseconds;

// Simulated clock. Time zero is the start of the scenario.
struct SimClock {
  using rep = Duration::rep;
  using period = Duration::period;
  using duration = Duration;
  using time_point = std::chrono::time_point<SimClock, Duration>;
  static constexpr bool is_steady = true;
};

using SimTime = SimClock::time_point;

constexpr SimTime from_us(std::int64_t us) { return SimTime{Duration{us}}; }
constexpr std::int64_t to_us(SimTime t) { return t.time_since_epoch().count(); }
constexpr double to_seconds(Duration d) { return static_cast<double>(d.count()) * 1e-6; }
constexpr double to_millis(Duration d) { return static_cast<double>(d.count()) * 1e-3; }

// n-th tick of a cadence of `hz` ticks per second, rounded to the nearest
// microsecond. Computed from n directly so long runs never accumulate drift.
inline SimTime cadence_tick(std::uint64_t n, double hz) {
  return from_us(static_cast<std::int64_t>(static_cast<double>(n) * 1e6 / hz + 0.5));
}

}  // namespace skygrid::sim
