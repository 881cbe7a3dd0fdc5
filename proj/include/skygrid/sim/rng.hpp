#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace skygrid::sim {

std::uint64_t splitmix64(std::uint64_t& state);

// Seed for an independent stream derived from the run seed and a stable key.
// Streams are keyed per entity so adding an entity leaves others' draws intact.
std::uint64_t derive_seed(std::uint64_t root_seed, std::uint64_t stream_key);

enum class StreamPurpose : std::uint32_t {
  radio_rx = 1,
  downlink = 2,
  uplink = 3,
  frame_payload = 4,
  test = 99,
};

constexpr std::uint64_t stream_key(StreamPurpose purpose, std::uint32_t entity) {
  return (static_cast<std::uint64_t>(purpose) << 32) | entity;
}

// Portable random stream: mt19937_64 output is fixed by the standard, and the
// derived draws below avoid std distributions, whose output is
// implementation-defined.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::numeric_limits<result_type>::min(); }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p_true) { return uniform01() < p_true; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace skygrid::sim
