#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "skygrid/drone/flight.hpp"
#include "skygrid/drone/rate_controller.hpp"
#include "skygrid/grid/gate.hpp"
#include "skygrid/server/view.hpp"
#include "skygrid/sim/radio.hpp"

namespace skygrid::app {

inline constexpr int kScenarioSchemaVersion = 1;

struct TourPoint {
  std::int64_t t_ms = 0;
  double x = 0.0;
  double y = 0.0;
};

struct CapacityStep {
  std::int64_t t_ms = 0;
  double capacity_bps = 0.0;
};

// Everything a run needs. Defaults model a 3x4 grid at 500 m spacing with a
// two-channel on-board radio.
struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::uint64_t seed = 1;
  Duration duration{60'000'000};

  struct Grid {
    std::uint32_t rows = 3;
    std::uint32_t cols = 4;
    double spacing = 500.0;
  } grid;

  sim::RadioModel radio;
  std::vector<CapacityStep> capacity_steps;
  sim::UplinkModel uplink;

  struct Fec {
    std::uint32_t k = 8;
    std::uint32_t r = 2;
  } fec;

  struct Video {
    std::size_t mtu = 1400;
    double fps = 30.0;
  } video;

  drone::RateConfig rate;

  struct Playout {
    Duration budget{200'000};
    Duration uplink_margin{20'000};
    double render_hz = 30.0;

    Duration overdue_budget() const { return budget - uplink_margin; }
  } playout;

  drone::FlightLimits flight;
  Vec3 home{600.0, 400.0, 50.0};
  std::vector<TourPoint> tour;  // moves the control origin over time; empty = fixed home

  server::ViewGeometry view;

  struct Control {
    double position_gain = 10.0;
    double repeat_hz = 50.0;
    double flight_step_hz = 50.0;
  } control;

  double snapshot_hz = 20.0;

  // Throws ConfigError naming the first offending field.
  void validate() const;

  // Receivers in row-major order; id = row * cols + col.
  std::vector<grid::ReceiverSite> receiver_sites() const;

  // Control origin at time t: home, or the tour interpolated linearly (held
  // at its ends) at home altitude.
  Vec3 origin_at(SimTime t) const;
};

// Parses a YAML scenario (JSON is accepted too). Missing keys take their
// defaults; unknown keys and invalid values throw ConfigError.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace skygrid::app
