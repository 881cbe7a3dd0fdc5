#include "skygrid/drone/fec.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

#include "skygrid/error.hpp"

namespace skygrid::fec {
namespace {

struct Tables {
  std::array<std::uint8_t, 512> exp{};
  std::array<std::uint8_t, 256> log{};
  std::array<std::array<std::uint8_t, 256>, 256> mul{};

  Tables() {
    unsigned x = 1;
    for (unsigned i = 0; i < 255; ++i) {
      exp[i] = static_cast<std::uint8_t>(x);
      log[x] = static_cast<std::uint8_t>(i);
      x <<= 1;
      if (x & 0x100) x ^= 0x11d;
    }
    for (unsigned i = 255; i < 512; ++i) exp[i] = exp[i - 255];
    for (unsigned a = 1; a < 256; ++a) {
      for (unsigned b = 1; b < 256; ++b) mul[a][b] = exp[log[a] + log[b]];
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

// dst ^= c * src over the common length.
void mul_add(std::uint8_t* dst, const std::uint8_t* src, std::size_t len, std::uint8_t c) {
  if (c == 0) return;
  const auto& row = tables().mul[c];
  for (std::size_t i = 0; i < len; ++i) dst[i] ^= row[src[i]];
}

}  // namespace

namespace gf256 {
std::uint8_t add(std::uint8_t a, std::uint8_t b) { return a ^ b; }
std::uint8_t mul(std::uint8_t a, std::uint8_t b) { return tables().mul[a][b]; }
std::uint8_t inv(std::uint8_t a) {
  if (a == 0) throw std::domain_error("GF(256): inverse of zero");
  return tables().exp[255 - tables().log[a]];
}
std::uint8_t div(std::uint8_t a, std::uint8_t b) { return mul(a, inv(b)); }
}  // namespace gf256

ErasureCode::ErasureCode(std::size_t k, std::size_t r) : k_(k), r_(r), cauchy_(k * r) {
  if (k == 0) throw ConfigError("fec.k", "must be at least 1");
  if (k + r > 256) {
    throw ConfigError("fec", "k + r = " + std::to_string(k + r) + " exceeds the GF(256) limit of 256");
  }
  for (std::size_t j = 0; j < r; ++j) {
    const auto x = static_cast<std::uint8_t>(k + j);
    for (std::size_t i = 0; i < k; ++i) {
      cauchy_[j * k + i] = gf256::inv(static_cast<std::uint8_t>(x ^ static_cast<std::uint8_t>(i)));
    }
  }
}

std::vector<Bytes> ErasureCode::encode(std::span<const std::span<const std::uint8_t>> data,
                                       std::size_t shard_len) const {
  if (data.empty() || data.size() > k_) {
    throw std::invalid_argument("encode needs between 1 and k data shards");
  }
  std::vector<Bytes> parity(r_, Bytes(shard_len, 0));
  for (std::size_t j = 0; j < r_; ++j) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i].size() > shard_len) throw std::invalid_argument("data shard longer than shard_len");
      mul_add(parity[j].data(), data[i].data(), data[i].size(), coefficient(j, i));
    }
  }
  return parity;
}

std::optional<std::vector<Bytes>> ErasureCode::reconstruct(std::span<const Shard> shards,
                                                           std::size_t data_count,
                                                           std::size_t shard_len) const {
  if (data_count == 0 || data_count > k_) {
    throw std::invalid_argument("data_count must be between 1 and k");
  }
  const std::size_t m = data_count;

  // Pick the first m distinct usable shards, preferring data shards.
  std::vector<const Shard*> chosen;
  std::vector<bool> seen(k_ + r_, false);
  auto consider = [&](bool want_data) {
    for (const Shard& s : shards) {
      if (chosen.size() == m) return;
      if (s.index >= k_ + r_ || seen[s.index]) continue;
      const bool is_data = s.index < k_;
      if (is_data != want_data) continue;
      if (is_data && s.index >= m) continue;  // virtual padding slot
      if (s.bytes.size() > shard_len) throw std::invalid_argument("shard longer than shard_len");
      seen[s.index] = true;
      chosen.push_back(&s);
    }
  };
  consider(true);
  consider(false);
  if (chosen.size() < m) return std::nullopt;

  std::vector<Bytes> out(m);
  std::vector<bool> have(m, false);
  for (const Shard* s : chosen) {
    if (s->index < m) {
      out[s->index].assign(shard_len, 0);
      std::copy(s->bytes.begin(), s->bytes.end(), out[s->index].begin());
      have[s->index] = true;
    }
  }
  if (std::all_of(have.begin(), have.end(), [](bool b) { return b; })) return out;

  // Solve A * data = shards, A built from the generator rows of the chosen
  // shards, via Gauss-Jordan on [A | I].
  std::vector<std::uint8_t> a(m * m, 0);
  std::vector<std::uint8_t> inv(m * m, 0);
  for (std::size_t row = 0; row < m; ++row) {
    const std::size_t idx = chosen[row]->index;
    if (idx < m) {
      a[row * m + idx] = 1;
    } else {
      for (std::size_t col = 0; col < m; ++col) a[row * m + col] = coefficient(idx - k_, col);
    }
    inv[row * m + row] = 1;
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    while (pivot < m && a[pivot * m + col] == 0) ++pivot;
    if (pivot == m) return std::nullopt;  // unreachable for an MDS generator
    if (pivot != col) {
      std::swap_ranges(a.begin() + pivot * m, a.begin() + pivot * m + m, a.begin() + col * m);
      std::swap_ranges(inv.begin() + pivot * m, inv.begin() + pivot * m + m, inv.begin() + col * m);
    }
    const std::uint8_t scale = gf256::inv(a[col * m + col]);
    for (std::size_t c = 0; c < m; ++c) {
      a[col * m + c] = gf256::mul(a[col * m + c], scale);
      inv[col * m + c] = gf256::mul(inv[col * m + c], scale);
    }
    for (std::size_t row = 0; row < m; ++row) {
      const std::uint8_t factor = a[row * m + col];
      if (row == col || factor == 0) continue;
      mul_add(&a[row * m], &a[col * m], m, factor);
      mul_add(&inv[row * m], &inv[col * m], m, factor);
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    if (have[i]) continue;
    out[i].assign(shard_len, 0);
    for (std::size_t t = 0; t < m; ++t) {
      mul_add(out[i].data(), chosen[t]->bytes.data(), chosen[t]->bytes.size(), inv[i * m + t]);
    }
  }
  return out;
}

}  // namespace skygrid::fec
