#pragma once

#include <optional>

#include "skygrid/messages.hpp"

namespace skygrid::drone {

struct RateConfig {
  double beta = 0.85;
  double alpha = 0.3;
  double bitrate_min = 1e6;
  double bitrate_max = 8e6;
  double bitrate_initial = 4e6;
  Duration ack_timeout{500'000};

  void validate() const;
};

// Video rate controller driven by receiver goodput reports.
//
// Each ACK contributes a sample bytes*8/span to an EWMA (the first sample
// initializes it). Once per frame interval the commanded bitrate becomes
// clamp(beta * ewma, min, max). If no ACK has been applied for ack_timeout
// the bitrate instead halves on every update until it reaches the floor.
class RateController {
 public:
  explicit RateController(RateConfig config, SimTime start = SimTime{});

  // Returns false for discarded ACKs (stale, replayed, or zero span).
  bool on_ack(const Ack& ack, SimTime now);

  double update_bitrate(SimTime now);

  double bitrate() const noexcept { return bitrate_; }
  double ewma_goodput() const noexcept { return ewma_; }
  bool has_estimate() const noexcept { return has_estimate_; }
  bool in_timeout() const noexcept { return in_timeout_; }
  std::uint64_t acks_applied() const noexcept { return acks_applied_; }
  const RateConfig& config() const noexcept { return config_; }

 private:
  RateConfig config_;
  double bitrate_;
  double ewma_ = 0.0;
  bool has_estimate_ = false;
  bool in_timeout_ = false;
  std::optional<SimTime> last_issued_;
  SimTime last_applied_at_;
  std::uint64_t acks_applied_ = 0;
};

}  // namespace skygrid::drone
