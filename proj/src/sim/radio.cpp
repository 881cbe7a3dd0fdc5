#include "skygrid/sim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "skygrid/error.hpp"

namespace skygrid::sim {

double RadioModel::loss_probability(double distance_m) const {
  if (distance_m <= r_reliable) return p_base;
  if (distance_m >= d_max) return 1.0;
  return p_base + (distance_m - r_reliable) / (d_max - r_reliable) * (1.0 - p_base);
}

Duration RadioModel::serialization_delay(std::size_t bytes) const {
  const double us = static_cast<double>(bytes) * 8.0 * 1e6 / channel_capacity_bps;
  return Duration{std::llround(us)};
}

bool RadioModel::has_channel(ChannelId channel) const {
  return std::find(channels.begin(), channels.end(), channel) != channels.end();
}

void RadioModel::validate() const {
  if (!(p_base >= 0.0 && p_base <= 1.0)) throw ConfigError("radio.p_base", "must be in [0, 1]");
  if (!(r_reliable > 0.0)) throw ConfigError("radio.r_reliable", "must be > 0");
  if (!(d_max > r_reliable)) throw ConfigError("radio.d_max", "must be greater than r_reliable");
  if (!(channel_capacity_bps > 0.0) || !std::isfinite(channel_capacity_bps)) {
    throw ConfigError("radio.channel_capacity", "must be a positive finite rate");
  }
  if (channels.empty()) throw ConfigError("radio.channels", "at least one channel is required");
  std::vector<ChannelId> sorted = channels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("radio.channels", "channel ids must be unique");
  }
}

void UplinkModel::validate() const {
  if (latency.count() < 0) throw ConfigError("uplink.latency_ms", "must be >= 0");
  if (!(loss >= 0.0 && loss <= 1.0)) throw ConfigError("uplink.loss", "must be in [0, 1]");
}

RadioMedium::RadioMedium(RadioModel model, std::uint64_t seed, std::vector<RadioSite> sites)
    : model_(std::move(model)), sites_(std::move(sites)) {
  model_.validate();
  for (const RadioSite& s : sites_) {
    for (ChannelId ch : s.channels) {
      if (!model_.has_channel(ch)) {
        throw ConfigError("radio.channels",
                          "receiver " + std::to_string(s.id) + " listens on unknown channel " +
                              std::to_string(ch));
      }
    }
    rx_rng_.emplace_back(derive_seed(seed, stream_key(StreamPurpose::radio_rx, s.id)));
    downlink_rng_.emplace_back(derive_seed(seed, stream_key(StreamPurpose::downlink, s.id)));
  }
  for (ChannelId ch : model_.channels) busy_until_[ch] = SimTime{};
}

Transmission RadioMedium::broadcast(ChannelId channel, std::size_t bytes, Vec3 from, SimTime now) {
  auto busy = busy_until_.find(channel);
  if (busy == busy_until_.end()) {
    throw std::invalid_argument("broadcast on unknown channel " + std::to_string(channel));
  }
  Transmission tx{channel, std::max(now, busy->second), {}, {}};
  tx.end = tx.start + model_.serialization_delay(bytes);
  busy->second = tx.end;

  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const RadioSite& s = sites_[i];
    if (std::find(s.channels.begin(), s.channels.end(), channel) == s.channels.end()) continue;
    const double d = distance(from, s.position);
    if (d >= model_.d_max) continue;
    if (!rx_rng_[i].bernoulli(model_.loss_probability(d))) {
      tx.deliveries.push_back(Delivery{s.id, tx.end});
    }
  }
  return tx;
}

std::optional<SimTime> RadioMedium::downlink(std::uint32_t site_id, Vec3 drone_position,
                                             std::size_t bytes, SimTime now) {
  const RadioSite& s = site(site_id);
  const auto idx = static_cast<std::size_t>(&s - sites_.data());
  const double d = distance(drone_position, s.position);
  if (d >= model_.d_max) return std::nullopt;
  if (downlink_rng_[idx].bernoulli(model_.loss_probability(d))) return std::nullopt;
  return now + model_.serialization_delay(bytes);
}

SimTime RadioMedium::channel_free_at(ChannelId channel) const {
  auto it = busy_until_.find(channel);
  if (it == busy_until_.end()) {
    throw std::invalid_argument("unknown channel " + std::to_string(channel));
  }
  return it->second;
}

void RadioMedium::set_channel_capacity(double bps) {
  if (!(bps > 0.0)) throw std::invalid_argument("channel capacity must be positive");
  model_.channel_capacity_bps = bps;
}

const RadioSite& RadioMedium::site(std::uint32_t id) const {
  auto it = std::find_if(sites_.begin(), sites_.end(), [id](const RadioSite& s) { return s.id == id; });
  if (it == sites_.end()) throw std::out_of_range("unknown receiver " + std::to_string(id));
  return *it;
}

}  // namespace skygrid::sim
