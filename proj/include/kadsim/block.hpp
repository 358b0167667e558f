#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "kadsim/node_id.hpp"
#include "kadsim/rng.hpp"

namespace kadsim {

// An extended data-availability block: a rows x cols grid of samples, each
// addressed by a 256-bit key derived from (block_id, row, col). Payload bytes
// are generated on demand (they never influence routing), 512 bytes of data
// plus 48 bytes of proof per sample.
struct DasBlock {
  static constexpr std::size_t kDataBytes = 512;
  static constexpr std::size_t kProofBytes = 48;
  static constexpr std::size_t kPayloadBytes = kDataBytes + kProofBytes;

  std::uint64_t block_id = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<U256> keys;  // row-major

  std::size_t sample_count() const { return keys.size(); }

  const U256& key(std::uint32_t row, std::uint32_t col) const {
    return keys[std::size_t(row) * cols + col];
  }

  std::array<std::uint8_t, kPayloadBytes> payload(std::uint32_t row,
                                                  std::uint32_t col) const {
    std::array<std::uint8_t, kPayloadBytes> out{};
    Rng rng = Rng::stream(block_id, (std::uint64_t(row) << 32) | col);
    for (std::size_t i = 0; i < out.size(); i += 8) {
      std::uint64_t word = rng.next_u64();
      for (std::size_t j = 0; j < 8 && i + j < out.size(); ++j) {
        out[i + j] = std::uint8_t(word >> (8 * j));
      }
    }
    return out;
  }
};

inline DasBlock build_block(std::uint64_t block_id, std::uint32_t rows = 512,
                            std::uint32_t cols = 512) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("build_block: empty grid");
  }
  DasBlock block;
  block.block_id = block_id;
  block.rows = rows;
  block.cols = cols;
  block.keys.reserve(std::size_t(rows) * cols);
  std::unordered_set<U256, U256Hash> seen;
  seen.reserve(std::size_t(rows) * cols * 2);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      U256 key = sample_key(block_id, r, c);
      if (!seen.insert(key).second) {
        throw std::runtime_error("build_block: sample key collision");
      }
      block.keys.push_back(key);
    }
  }
  return block;
}

}  // namespace kadsim
