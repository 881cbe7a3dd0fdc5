#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "skygrid/geometry.hpp"
#include "skygrid/sim/rng.hpp"
#include "skygrid/sim/time.hpp"

namespace skygrid::sim {

using ChannelId = std::uint16_t;

// Distance-based packet loss with a reliable plateau and a linear ramp to
// certain loss at d_max. Channels are orthogonal and share one capacity.
struct RadioModel {
  double p_base = 0.05;
  double r_reliable = 300.0;
  double d_max = 700.0;
  double channel_capacity_bps = 6e6;
  std::vector<ChannelId> channels{1, 6};

  double loss_probability(double distance_m) const;
  Duration serialization_delay(std::size_t bytes) const;
  bool has_channel(ChannelId channel) const;

  // Throws ConfigError naming the offending "radio.*" field.
  void validate() const;
};

// Receiver-to-server LAN.
struct UplinkModel {
  Duration latency{5000};
  double loss = 0.0;

  void validate() const;
};

struct RadioSite {
  std::uint32_t id = 0;
  Vec3 position;
  std::vector<ChannelId> channels;
};

struct Delivery {
  std::uint32_t receiver;
  SimTime arrival;
};

struct Transmission {
  ChannelId channel;
  SimTime start;
  SimTime end;
  std::vector<Delivery> deliveries;
};

// Shared broadcast medium. Each channel serializes one packet at a time;
// every listening site inside d_max runs its own Bernoulli reception trial.
class RadioMedium {
 public:
  RadioMedium(RadioModel model, std::uint64_t seed, std::vector<RadioSite> sites);

  Transmission broadcast(ChannelId channel, std::size_t bytes, Vec3 from, SimTime now);

  // Site-to-drone control traffic (ACKs, setpoints). Subject to the same
  // distance loss; does not occupy the broadcast channels.
  std::optional<SimTime> downlink(std::uint32_t site_id, Vec3 drone_position, std::size_t bytes,
                                  SimTime now);

  SimTime channel_free_at(ChannelId channel) const;
  void set_channel_capacity(double bps);

  const RadioModel& model() const noexcept { return model_; }
  const std::vector<RadioSite>& sites() const noexcept { return sites_; }

 private:
  const RadioSite& site(std::uint32_t id) const;

  RadioModel model_;
  std::vector<RadioSite> sites_;
  std::vector<RngStream> rx_rng_;
  std::vector<RngStream> downlink_rng_;
  std::map<ChannelId, SimTime> busy_until_;
};

}  // namespace skygrid::sim
