#include "skygrid/grid/gate.hpp"

#include <algorithm>
#include <numeric>

namespace skygrid::grid {

std::vector<GateDecision> compute_gate(Vec2 drone, std::span<const ReceiverSite> sites) {
  std::vector<std::size_t> order(sites.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> d2(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) d2[i] = squared_distance(drone, sites[i].position);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (d2[a] != d2[b]) return d2[a] < d2[b];
    return sites[a].id < sites[b].id;
  });

  std::vector<GateDecision> out;
  out.reserve(sites.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const ReceiverSite& s = sites[order[rank]];
    out.push_back(GateDecision{s.id, rank < kUploadSetSize, static_cast<std::uint32_t>(rank + 1),
                               distance(drone, s.position)});
  }
  return out;
}

std::vector<std::uint32_t> upload_set(std::span<const GateDecision> gate) {
  std::vector<std::uint32_t> ids;
  for (const GateDecision& g : gate) {
    if (g.in_upload_set) ids.push_back(g.receiver_id);
  }
  return ids;
}

}  // namespace skygrid::grid
