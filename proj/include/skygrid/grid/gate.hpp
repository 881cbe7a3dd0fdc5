#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "skygrid/geometry.hpp"

namespace skygrid::grid {

inline constexpr std::size_t kUploadSetSize = 3;

struct ReceiverSite {
  std::uint32_t id = 0;
  Vec2 position;
};

struct GateDecision {
  std::uint32_t receiver_id = 0;
  bool in_upload_set = false;
  std::uint32_t rank = 0;  // 1-based
  double distance = 0.0;
};

// Ranks every receiver by ground distance to the drone (ties to the lower
// id); the first kUploadSetSize upload. Result is ordered by rank. Pure, so
// every node reaches the same answer from the same position.
std::vector<GateDecision> compute_gate(Vec2 drone, std::span<const ReceiverSite> sites);

// Ids of the upload set in rank order.
std::vector<std::uint32_t> upload_set(std::span<const GateDecision> gate);

}  // namespace skygrid::grid
