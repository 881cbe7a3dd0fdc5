#pragma once

#include <cstdint>
#include <functional>
#include <stop_token>

#include "skygrid/app/scenario.hpp"

namespace skygrid::app {

struct LiveOptions {
  std::uint16_t port = 0;  // 0 picks a free port
  std::function<void(std::uint16_t)> on_listening;
  double time_scale = 1.0;  // simulated seconds per wall second
};

// Serves one console over newline-delimited JSON on TCP. The simulation
// advances in real time only while a console is connected; inputs become
// head samples at the next simulation step, snapshots go out at the
// scenario's snapshot rate. Returns when `stop` is requested.
void run_live(const Scenario& scenario, const LiveOptions& options, std::stop_token stop);

}  // namespace skygrid::app
