#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "kadsim/node_id.hpp"
#include "kadsim/rng.hpp"

namespace kadsim {

// One node's bucketed view of the network. Built once from the full
// population (idealized bootstrap: no joins or churn afterwards), so the
// table is immutable. Bucket b holds peers whose ids share exactly b leading
// bits with the local id.
//
// When a bucket overflows k, which members are kept depends on how far the
// bucket reaches. Near buckets (index >= kFarSampleBuckets) keep the k
// closest to the local id: dense knowledge of the own neighborhood. Far
// buckets keep a deterministic uniform sample, keyed by a fixed hash of the
// member id, so long-range references spread over the whole subtree instead
// of clustering next to the local id; without that spread, iterative lookups
// gain almost no prefix bits per hop mid-route. Hash-keyed sampling keeps
// the choice deterministic and gives every node the same view of who the
// "well-known" members of a subtree are.
class RoutingTable {
 public:
  static constexpr int kBuckets = 256;
  static constexpr int kFarSampleBuckets = 3;

  // `ids` is the whole population, `local` an index into it. Nodes are stored
  // as indices into that same vector.
  RoutingTable(const std::vector<U256>& ids, std::uint32_t local, int k)
      : local_(local) {
    if (ids.empty()) throw std::invalid_argument("routing table: empty population");
    if (local >= ids.size()) {
      throw std::invalid_argument("routing table: local id not in population");
    }
    if (k < 1) throw std::invalid_argument("routing table: k must be >= 1");

    const U256& self = ids[local];
    const std::uint32_t n = static_cast<std::uint32_t>(ids.size());

    // Counting sort by bucket index, then per-bucket truncation to the k
    // closest. Keeps the build O(N) per node.
    std::vector<std::uint32_t> counts(kBuckets + 1, 0);
    std::vector<std::uint8_t> bucket_of(n, 0);
    for (std::uint32_t j = 0; j < n; ++j) {
      if (j == local) continue;
      int b = bucket_index(self, ids[j]);
      bucket_of[j] = static_cast<std::uint8_t>(b);
      ++counts[b];
    }
    std::vector<std::uint32_t> start(kBuckets + 1, 0);
    for (int b = 0; b < kBuckets; ++b) start[b + 1] = start[b] + counts[b];
    std::vector<std::uint32_t> grouped(start[kBuckets]);
    std::vector<std::uint32_t> cursor(start.begin(), start.end() - 1);
    for (std::uint32_t j = 0; j < n; ++j) {
      if (j == local) continue;
      grouped[cursor[bucket_of[j]]++] = j;
    }

    offsets_.assign(kBuckets + 1, 0);
    entries_.reserve(std::min<std::size_t>(grouped.size(), std::size_t(k) * 24));
    for (int b = 0; b < kBuckets; ++b) {
      auto first = grouped.begin() + start[b];
      auto last = grouped.begin() + start[b + 1];
      auto kept_end = last;
      if (last - first > k) {
        kept_end = first + k;
        if (b < kFarSampleBuckets) {
          std::nth_element(first, kept_end, last, [&](std::uint32_t x, std::uint32_t y) {
            return mix64(ids[x].w[3]) < mix64(ids[y].w[3]);
          });
        } else {
          std::nth_element(first, kept_end, last, [&](std::uint32_t x, std::uint32_t y) {
            return closer(ids[x], ids[y], self);
          });
        }
      }
      std::sort(first, kept_end, [&](std::uint32_t x, std::uint32_t y) {
        return closer(ids[x], ids[y], self);
      });
      offsets_[b] = static_cast<std::uint32_t>(entries_.size());
      entries_.insert(entries_.end(), first, kept_end);
    }
    offsets_[kBuckets] = static_cast<std::uint32_t>(entries_.size());
  }

  std::uint32_t local() const { return local_; }
  std::size_t size() const { return entries_.size(); }

  std::span<const std::uint32_t> bucket(int b) const {
    return {entries_.data() + offsets_[b], entries_.data() + offsets_[b + 1]};
  }

  std::span<const std::uint32_t> entries() const { return entries_; }

  // The up-to-n table entries closest to `key`, ascending by XOR distance.
  std::vector<std::uint32_t> closest(const std::vector<U256>& ids,
                                     const U256& key, std::size_t n) const {
    std::vector<std::uint32_t> out(entries_.begin(), entries_.end());
    std::size_t take = std::min(n, out.size());
    std::partial_sort(out.begin(), out.begin() + take, out.end(),
                      [&](std::uint32_t x, std::uint32_t y) {
                        return closer(ids[x], ids[y], key);
                      });
    out.resize(take);
    return out;
  }

 private:
  std::uint32_t local_;
  std::vector<std::uint32_t> entries_;   // grouped by bucket, closest-first
  std::vector<std::uint32_t> offsets_;   // bucket b = [offsets_[b], offsets_[b+1])
};

}  // namespace kadsim
