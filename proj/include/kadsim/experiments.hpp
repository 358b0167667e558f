#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "kadsim/block.hpp"
#include "kadsim/client.hpp"
#include "kadsim/network.hpp"

namespace kadsim {

// Brute-force n closest nodes to `key` over the whole population. Serves as
// the ground truth for synthetic block placement and for oracle checks.
inline std::vector<std::uint32_t> global_closest(const std::vector<U256>& ids,
                                                 const U256& key,
                                                 std::size_t n) {
  std::vector<std::uint32_t> all(ids.size());
  std::iota(all.begin(), all.end(), 0);
  std::size_t take = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + take, all.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return closer(ids[a], ids[b], key);
                    });
  all.resize(take);
  return all;
}

// `count` distinct values from [0, total), uniform, via a sparse partial
// Fisher-Yates shuffle.
inline std::vector<std::uint32_t> sample_without_replacement(
    std::uint32_t total, std::uint32_t count, Rng& rng) {
  if (count > total) {
    throw std::invalid_argument("sample_without_replacement: count > total");
  }
  std::unordered_map<std::uint32_t, std::uint32_t> overlay;
  overlay.reserve(count * 2);
  auto at = [&](std::uint32_t i) {
    auto it = overlay.find(i);
    return it == overlay.end() ? i : it->second;
  };
  std::vector<std::uint32_t> out;
  out.reserve(count);
  for (std::uint32_t j = 0; j < count; ++j) {
    std::uint32_t r = j + std::uint32_t(rng.below(total - j));
    std::uint32_t v = at(r);
    overlay[r] = at(j);
    out.push_back(v);
  }
  return out;
}

struct SamplingSpec {
  std::uint32_t queries = 80;  // sample lookups per set
  std::uint32_t sets = 100;
  bool random_origin_per_set = true;  // otherwise one fixed origin for all sets

  void validate(const DasBlock& block) const {
    if (queries == 0) throw ConfigError("queries must be >= 1");
    if (sets == 0) throw ConfigError("sets must be >= 1");
    if (queries > block.sample_count()) {
      throw ConfigError("queries exceeds the number of samples in the block");
    }
  }
};

struct SeedingSpec {
  std::uint32_t sample_count = 1000;
  std::uint32_t seeders = 1;

  void validate(const DasBlock& block, std::uint32_t nodes) const {
    if (sample_count == 0) throw ConfigError("samples must be >= 1");
    if (sample_count > block.sample_count()) {
      throw ConfigError("samples exceeds the block grid");
    }
    if (seeders == 0) throw ConfigError("seeders must be >= 1");
    if (seeders > nodes) throw ConfigError("seeders exceeds the node count");
  }
};

struct SamplingResult {
  std::vector<OpRecord> records;            // all sets, op_id ascending
  std::vector<std::uint64_t> set_duration_us;  // max end - min start, per set
};

// Retrieval workload: `sets` batches of `queries` concurrent sample lookups,
// each batch launched at virtual time zero from one origin node. The queried
// samples are placed on their true k closest nodes beforehand (idealized
// seeding), so lookups measure routing, not seeding quality. Contact
// counters reset between batches unless the network is configured to keep
// them.
inline SamplingResult run_sampling(Network& net, const DhtParams& dht,
                                   const DasBlock& block,
                                   const SamplingSpec& spec,
                                   std::uint64_t seed) {
  spec.validate(block);
  dht.validate();
  SamplingResult result;
  result.records.reserve(std::size_t(spec.queries) * spec.sets);

  Rng pick_rng = Rng::stream(seed, 0xbeef);
  std::uint32_t fixed_origin =
      std::uint32_t(pick_rng.below(net.size()));
  std::uint64_t op_id = 0;

  for (std::uint32_t s = 0; s < spec.sets; ++s) {
    if (!net.params().gamma_persist) net.reset_batch();
    std::uint32_t origin = spec.random_origin_per_set
                               ? std::uint32_t(pick_rng.below(net.size()))
                               : fixed_origin;
    auto picks = sample_without_replacement(
        std::uint32_t(block.sample_count()), spec.queries, pick_rng);

    std::vector<LookupOp> ops;
    ops.reserve(spec.queries);
    for (std::uint32_t idx : picks) {
      const U256& key = block.keys[idx];
      if (net.replica_count(key) == 0) {
        for (std::uint32_t h : global_closest(net.ids(), key, std::size_t(dht.k))) {
          net.add_holder(key, h);
        }
      }
      ops.emplace_back(OpType::LookupValue, origin, key, op_id++, s, seed);
    }
    run_batch(net, dht, ops);

    std::uint64_t set_end = 0;
    for (auto& op : ops) {
      set_end = std::max(set_end, op.record().end_us);
      result.records.push_back(op.take_record());
    }
    result.set_duration_us.push_back(set_end);  // every op starts at 0
  }
  return result;
}

struct SeedingResult {
  std::vector<OpRecord> records;      // one provide per sample
  std::uint64_t total_duration_us = 0;
  std::vector<std::uint32_t> seeders;
};

// Seeding workload: one provide operation per sample, all launched
// concurrently at virtual time zero. Samples are assigned to seeders round-
// robin in row-major order. Contact counters accumulate across the whole
// batch: the congestion they model is exactly what this experiment measures.
inline SeedingResult run_seeding(Network& net, const DhtParams& dht,
                                 const DasBlock& block, const SeedingSpec& spec,
                                 std::uint64_t seed) {
  spec.validate(block, net.size());
  dht.validate();
  net.reset_batch();

  SeedingResult result;
  Rng pick_rng = Rng::stream(seed, 0x5eed);
  result.seeders = sample_without_replacement(net.size(), spec.seeders, pick_rng);

  std::vector<LookupOp> ops;
  ops.reserve(spec.sample_count);
  for (std::uint32_t i = 0; i < spec.sample_count; ++i) {
    std::uint32_t seeder = result.seeders[i % result.seeders.size()];
    ops.emplace_back(OpType::Provide, seeder, block.keys[i], i, 0, seed);
  }
  run_batch(net, dht, ops);

  for (auto& op : ops) {
    result.total_duration_us =
        std::max(result.total_duration_us, op.record().end_us);
    result.records.push_back(op.take_record());
  }
  return result;
}

struct SlotBudget {
  std::uint64_t duration_us = 0;
  std::uint64_t slot_us = 12'000'000;
  double ratio() const { return double(duration_us) / double(slot_us); }
  bool fits() const { return duration_us <= slot_us; }
};

inline SlotBudget slot_budget_check(std::uint64_t duration_us,
                                    std::uint64_t slot_us = 12'000'000) {
  if (slot_us == 0) throw std::invalid_argument("slot_budget_check: zero slot");
  return {duration_us, slot_us};
}

}  // namespace kadsim
