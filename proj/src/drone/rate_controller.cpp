#include "skygrid/drone/rate_controller.hpp"

#include <algorithm>
#include <cmath>

#include "skygrid/error.hpp"

namespace skygrid::drone {

void RateConfig::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("rate.beta", "must be in (0, 1]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("rate.alpha", "must be in (0, 1]");
  if (!(bitrate_min > 0.0)) throw ConfigError("video.bitrate_min", "must be > 0");
  if (!(bitrate_max >= bitrate_min)) throw ConfigError("video.bitrate_max", "must be >= bitrate_min");
  if (!(bitrate_initial >= bitrate_min && bitrate_initial <= bitrate_max)) {
    throw ConfigError("video.bitrate_initial", "must lie in [bitrate_min, bitrate_max]");
  }
  if (ack_timeout.count() <= 0) throw ConfigError("rate.ack_timeout_ms", "must be > 0");
}

RateController::RateController(RateConfig config, SimTime start)
    : config_(config), bitrate_(config.bitrate_initial), last_applied_at_(start) {
  config_.validate();
}

bool RateController::on_ack(const Ack& ack, SimTime now) {
  if (last_issued_ && ack.issued_at <= *last_issued_) return false;
  if (ack.span.count() <= 0) return false;

  const double sample = static_cast<double>(ack.bytes_received) * 8.0 / sim::to_seconds(ack.span);
  ewma_ = has_estimate_ ? (1.0 - config_.alpha) * ewma_ + config_.alpha * sample : sample;
  has_estimate_ = true;
  last_issued_ = ack.issued_at;
  last_applied_at_ = now;
  ++acks_applied_;
  return true;
}

double RateController::update_bitrate(SimTime now) {
  if (now - last_applied_at_ >= config_.ack_timeout) {
    in_timeout_ = true;
    bitrate_ = std::max(config_.bitrate_min, bitrate_ / 2.0);
  } else if (has_estimate_) {
    in_timeout_ = false;
    bitrate_ = std::clamp(config_.beta * ewma_, config_.bitrate_min, config_.bitrate_max);
  }
  return bitrate_;
}

}  // namespace skygrid::drone
