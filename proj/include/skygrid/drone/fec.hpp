#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace skygrid::fec {

using Bytes = std::vector<std::uint8_t>;

// Arithmetic in GF(2^8) with the 0x11d reduction polynomial.
namespace gf256 {
std::uint8_t add(std::uint8_t a, std::uint8_t b);
std::uint8_t mul(std::uint8_t a, std::uint8_t b);
std::uint8_t div(std::uint8_t a, std::uint8_t b);
std::uint8_t inv(std::uint8_t a);
}  // namespace gf256

struct Shard {
  std::size_t index;  // 0..k-1 data, k..k+r-1 parity
  std::span<const std::uint8_t> bytes;
};

// Systematic MDS erasure code over bytes. The generator is the identity on
// top of a k-column Cauchy matrix; any square submatrix of a Cauchy matrix is
// invertible, so any k of the k+r shards determine the data.
//
// A block may carry fewer than k data shards; the missing ones are virtual
// zero shards that are never transmitted (a shortened code). Shorter shards
// are zero-padded to the shard length.
class ErasureCode {
 public:
  // Throws ConfigError when k == 0 or k + r > 256.
  ErasureCode(std::size_t k, std::size_t r);

  std::size_t k() const noexcept { return k_; }
  std::size_t r() const noexcept { return r_; }

  // `data` holds 1..k shards. Returns r parity shards of `shard_len` bytes.
  std::vector<Bytes> encode(std::span<const std::span<const std::uint8_t>> data,
                            std::size_t shard_len) const;

  // Recovers the `data_count` data shards (each `shard_len` bytes, padded)
  // from any `data_count` distinct shards. nullopt when too few are given.
  std::optional<std::vector<Bytes>> reconstruct(std::span<const Shard> shards,
                                                std::size_t data_count,
                                                std::size_t shard_len) const;

  std::uint8_t coefficient(std::size_t parity_row, std::size_t data_col) const {
    return cauchy_[parity_row * k_ + data_col];
  }

 private:
  std::size_t k_;
  std::size_t r_;
  std::vector<std::uint8_t> cauchy_;  // r x k, row-major
};

}  // namespace skygrid::fec
