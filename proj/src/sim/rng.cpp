#include "skygrid/sim/rng.hpp"

namespace skygrid::sim {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t root_seed, std::uint64_t stream_key) {
  std::uint64_t state = root_seed;
  const std::uint64_t mixed_root = splitmix64(state);
  state = mixed_root ^ stream_key;
  splitmix64(state);
  return splitmix64(state);
}

}  // namespace skygrid::sim
