#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

#include "kadsim/rng.hpp"
#include "kadsim/sha256.hpp"

namespace kadsim {

// 256-bit identifier. Node ids and sample keys live in the same XOR metric
// space; w[0] holds the most significant 64 bits.
struct U256 {
  std::array<std::uint64_t, 4> w{};

  friend constexpr bool operator==(const U256&, const U256&) = default;

  friend constexpr std::strong_ordering operator<=>(const U256& a,
                                                    const U256& b) {
    for (int i = 0; i < 4; ++i) {
      if (a.w[i] != b.w[i]) return a.w[i] <=> b.w[i];
    }
    return std::strong_ordering::equal;
  }

  friend constexpr U256 operator^(const U256& a, const U256& b) {
    U256 r;
    for (int i = 0; i < 4; ++i) r.w[i] = a.w[i] ^ b.w[i];
    return r;
  }

  constexpr bool is_zero() const {
    return (w[0] | w[1] | w[2] | w[3]) == 0;
  }

  // Number of leading zero bits, 256 when the value is zero.
  constexpr int leading_zeros() const {
    int n = 0;
    for (int i = 0; i < 4; ++i) {
      if (w[i] == 0) {
        n += 64;
      } else {
        return n + std::countl_zero(w[i]);
      }
    }
    return n;
  }

  std::string hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(64, '0');
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 16; ++j) {
        out[16 * i + j] = digits[(w[i] >> (60 - 4 * j)) & 0xf];
      }
    }
    return out;
  }

  static U256 from_bytes(const std::array<std::uint8_t, 32>& b) {
    U256 r;
    for (int i = 0; i < 4; ++i) {
      std::uint64_t v = 0;
      for (int j = 0; j < 8; ++j) v = (v << 8) | b[8 * i + j];
      r.w[i] = v;
    }
    return r;
  }

  static U256 random(Rng& rng) {
    U256 r;
    for (auto& word : r.w) word = rng.next_u64();
    return r;
  }
};

using NodeId = U256;

struct U256Hash {
  std::size_t operator()(const U256& v) const {
    return static_cast<std::size_t>(
        mix64(v.w[0] ^ mix64(v.w[1] ^ mix64(v.w[2] ^ mix64(v.w[3])))));
  }
};

inline U256 xor_distance(const U256& a, const U256& b) { return a ^ b; }

// True when a is strictly closer to ref than b under the XOR metric. Compares
// word by word without materializing the distances.
inline bool closer(const U256& a, const U256& b, const U256& ref) {
  for (int i = 0; i < 4; ++i) {
    std::uint64_t da = a.w[i] ^ ref.w[i];
    std::uint64_t db = b.w[i] ^ ref.w[i];
    if (da != db) return da < db;
  }
  return false;
}

// Bucket index of `remote` relative to `local`: the shared prefix length of
// the two ids, i.e. 255 - floor(log2(xor_distance)). Range [0, 255].
inline int bucket_index(const U256& local, const U256& remote) {
  U256 d = local ^ remote;
  if (d.is_zero()) throw std::invalid_argument("bucket_index: self-reference");
  return d.leading_zeros();
}

// Key of one block sample: a 256-bit hash of the fixed-width big-endian
// encoding of (block_id, row, col).
inline U256 sample_key(std::uint64_t block_id, std::uint32_t row,
                       std::uint32_t col) {
  std::array<std::uint8_t, 16> msg{};
  for (int i = 0; i < 8; ++i) msg[i] = std::uint8_t(block_id >> (56 - 8 * i));
  for (int i = 0; i < 4; ++i) msg[8 + i] = std::uint8_t(row >> (24 - 8 * i));
  for (int i = 0; i < 4; ++i) msg[12 + i] = std::uint8_t(col >> (24 - 8 * i));
  return U256::from_bytes(detail::Sha256::digest(msg.data(), msg.size()));
}

}  // namespace kadsim
