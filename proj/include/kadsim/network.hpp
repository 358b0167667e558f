#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kadsim/node_id.hpp"
#include "kadsim/rng.hpp"
#include "kadsim/routing_table.hpp"

namespace kadsim {

// Thrown for invalid parameter values; the CLI maps it to its own exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DelayRange {
  std::uint64_t min_us = 0;
  std::uint64_t max_us = 0;
};

struct NetworkParams {
  std::uint32_t node_count = 12000;
  double fast_error_rate = 0.10;
  double slow_error_rate = 0.0;
  DelayRange conn_delay{100000, 260000};  // successful round-trip
  DelayRange fast_delay{10000, 50000};    // refused connection
  DelayRange slow_delay{500000, 1000000}; // timed-out connection
  std::uint64_t gamma_us = 0;             // per-contact congestion overhead
  bool gamma_persist = false;             // keep counters across batches

  void validate() const {
    if (node_count < 2) throw ConfigError("node_count must be >= 2");
    auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!rate_ok(fast_error_rate)) throw ConfigError("fast_error_rate must be in [0, 1]");
    if (!rate_ok(slow_error_rate)) throw ConfigError("slow_error_rate must be in [0, 1]");
    if (fast_error_rate + slow_error_rate > 1.0) {
      throw ConfigError("fast_error_rate + slow_error_rate must be <= 1");
    }
    auto range_ok = [](const DelayRange& d) { return d.min_us <= d.max_us; };
    if (!range_ok(conn_delay)) throw ConfigError("conn_delay range is inverted");
    if (!range_ok(fast_delay)) throw ConfigError("fast_delay range is inverted");
    if (!range_ok(slow_delay)) throw ConfigError("slow_delay range is inverted");
  }
};

enum class OutcomeKind : std::uint8_t { Success, FastError, SlowError };

struct ConnectionOutcome {
  OutcomeKind kind;
  std::uint64_t delay_us;  // base delay plus congestion overhead
};

// The simulated network: the node population, one routing table per node,
// per-node contact counters, and the idealized key/value store.
//
// A connection attempt samples an outcome (success, fast refusal, slow
// timeout) and a base delay uniform in the range for that outcome, then adds
// the congestion overhead gamma * (contacts already made by the caller +
// contacts already received by the callee). Both endpoint counters are read
// before being incremented, so the first contact of a batch carries no
// overhead. Errors deliver no peers; the caller still waits out the delay.
class Network {
 public:
  Network(const NetworkParams& params, std::uint64_t seed) : params_(params) {
    params_.validate();
    thr_fast_ = rate_threshold(params_.fast_error_rate);
    thr_slow_ = rate_threshold(params_.slow_error_rate);

    Rng id_rng = Rng::stream(seed, 0xa11ce);
    ids_.reserve(params_.node_count);
    std::unordered_set<U256, U256Hash> seen;
    seen.reserve(params_.node_count * 2);
    while (ids_.size() < params_.node_count) {
      U256 id = U256::random(id_rng);
      if (seen.insert(id).second) ids_.push_back(id);  // collisions resampled
    }
    loads_.assign(params_.node_count, 0);
  }

  // Builds every routing table from global knowledge. Tables are immutable
  // and independent, so the build is spread across threads.
  void build_tables(int k) {
    tables_.clear();
    tables_.reserve(ids_.size());
    for (std::uint32_t i = 0; i < ids_.size(); ++i) {
      tables_.emplace_back();
    }
    std::uint32_t n = static_cast<std::uint32_t>(ids_.size());
    unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(), 16);
    if (workers < 2 || n < 512) {
      for (std::uint32_t i = 0; i < n; ++i) tables_[i].emplace(ids_, i, k);
      return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([this, n, k, w, workers] {
        for (std::uint32_t i = w; i < n; i += workers) {
          tables_[i].emplace(ids_, i, k);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  ConnectionOutcome connect(std::uint32_t src, std::uint32_t dst, Rng& rng) {
    if (src == dst) throw std::invalid_argument("connect: self-connection");
    std::uint64_t draw = rng.next_u64();
    OutcomeKind kind;
    const DelayRange* range;
    if (draw < thr_fast_) {
      kind = OutcomeKind::FastError;
      range = &params_.fast_delay;
    } else if (draw - thr_fast_ < thr_slow_) {
      kind = OutcomeKind::SlowError;
      range = &params_.slow_delay;
    } else {
      kind = OutcomeKind::Success;
      range = &params_.conn_delay;
    }
    std::uint64_t base = rng.between(range->min_us, range->max_us);
    std::uint64_t overhead = params_.gamma_us * (loads_[src] + loads_[dst]);
    ++loads_[src];
    ++loads_[dst];
    return {kind, base + overhead};
  }

  // Clears the per-node contact counters at the start of a new batch.
  void reset_batch() { loads_.assign(loads_.size(), 0); }

  void add_holder(const U256& key, std::uint32_t node) {
    auto& list = holders_[key];
    for (std::uint32_t h : list) {
      if (h == node) return;
    }
    list.push_back(node);
  }

  bool holds(const U256& key, std::uint32_t node) const {
    auto it = holders_.find(key);
    if (it == holders_.end()) return false;
    for (std::uint32_t h : it->second) {
      if (h == node) return true;
    }
    return false;
  }

  std::size_t replica_count(const U256& key) const {
    auto it = holders_.find(key);
    return it == holders_.end() ? 0 : it->second.size();
  }

  // Stored samples per node, indexed by node.
  std::vector<std::uint64_t> stored_per_node() const {
    std::vector<std::uint64_t> counts(ids_.size(), 0);
    for (const auto& [key, list] : holders_) {
      for (std::uint32_t h : list) ++counts[h];
    }
    return counts;
  }

  const NetworkParams& params() const { return params_; }
  const std::vector<U256>& ids() const { return ids_; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(ids_.size()); }
  const RoutingTable& table(std::uint32_t i) const { return *tables_[i]; }
  const std::vector<std::uint64_t>& loads() const { return loads_; }

 private:
  static std::uint64_t rate_threshold(double rate) {
    if (rate >= 1.0) return ~0ull;
    if (rate <= 0.0) return 0;
    return static_cast<std::uint64_t>(rate * 18446744073709551616.0);
  }

  NetworkParams params_;
  std::uint64_t thr_fast_ = 0;
  std::uint64_t thr_slow_ = 0;
  std::vector<U256> ids_;
  std::vector<std::optional<RoutingTable>> tables_;
  std::vector<std::uint64_t> loads_;
  std::unordered_map<U256, std::vector<std::uint32_t>, U256Hash> holders_;
};

}  // namespace kadsim
