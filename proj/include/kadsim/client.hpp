#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kadsim/event_queue.hpp"
#include "kadsim/network.hpp"
#include "kadsim/node_id.hpp"
#include "kadsim/rng.hpp"

namespace kadsim {

struct DhtParams {
  int k = 20;
  int alpha = 3;           // in-flight queries per operation (lookup phase)
  int beta = 20;           // closest peers returned per query
  int stall_limit = 4;     // unproductive round-trips before a lookup stops
  int store_window = 10;   // in-flight store pushes per provide

  void validate() const {
    if (k < 1) throw ConfigError("k must be >= 1");
    if (alpha < 1 || alpha > 64) throw ConfigError("alpha must be in [1, 64]");
    if (beta < 1 || beta > 1024) throw ConfigError("beta must be in [1, 1024]");
    if (stall_limit < 1) throw ConfigError("stall_limit must be >= 1");
    if (store_window < 1 || store_window > 1024) {
      throw ConfigError("store_window must be in [1, 1024]");
    }
  }
};

enum class OpType : std::uint8_t { LookupNodes, LookupValue, Provide };

inline const char* op_type_name(OpType t) {
  switch (t) {
    case OpType::LookupNodes: return "lookup_nodes";
    case OpType::LookupValue: return "lookup_value";
    case OpType::Provide: return "provide";
  }
  return "?";
}

// Outcome of one operation. hops counts completed query round-trips during
// the lookup phase, successful or failed; contacts still in flight when the
// lookup stops are not counted. Store round-trips of a provide are reported
// through stored_on, not through hops.
struct OpRecord {
  std::uint64_t op_id = 0;
  std::uint32_t set_id = 0;
  OpType op_type = OpType::LookupNodes;
  U256 key{};
  std::uint32_t origin = 0;
  std::uint32_t hops = 0;
  std::uint32_t failed_fast = 0;
  std::uint32_t failed_slow = 0;
  std::uint64_t start_us = 0;
  std::uint64_t end_us = 0;
  bool success = false;
  std::vector<std::uint32_t> stored_on;
};

// One iterative operation (lookup_nodes, lookup_value or provide) advancing
// over the shared event queue.
//
// Up to alpha queries are in flight; their completions are processed in
// dispatch order (a FIFO pipeline), and the virtual cursor advances to
// max(cursor, completion time) as each one is taken. Processing in dispatch
// order rather than completion order is what keeps the query sequence, and
// with it every hop count, independent of delays: gamma and the delay ranges
// can only stretch the timeline, never steer the routing. Randomness comes
// from a per-operation stream consumed in dispatch order, so error draws are
// fixed by (seed, op_id) alone.
//
// A lookup stops when one of:
//   - the value was returned (lookup_value),
//   - stall_limit consecutive round-trips brought no candidate into the
//     k closest known (failed round-trips bring none by definition),
//   - the k closest known live candidates have all responded,
//   - no candidates are left to query.
// Failed nodes are dropped from the known set and never re-queried. The
// result is the k closest live candidates, queried or merely reported.
class LookupOp {
 public:
  enum class Phase : std::uint8_t { Pending, Lookup, Store, Done };

  LookupOp(OpType type, std::uint32_t origin, const U256& key,
           std::uint64_t op_id, std::uint32_t set_id, std::uint64_t seed)
      : rng_(Rng::stream(seed, op_id)), key_(key) {
    rec_.op_id = op_id;
    rec_.set_id = set_id;
    rec_.op_type = type;
    rec_.key = key;
    rec_.origin = origin;
  }

  Phase phase() const { return phase_; }
  const OpRecord& record() const { return rec_; }
  OpRecord take_record() { return std::move(rec_); }
  const std::vector<std::uint32_t>& result() const { return result_; }

  // Advances the state machine; called once per scheduled event.
  void advance(Network& net, const DhtParams& dht,
               EventQueue<std::uint32_t>& queue, std::uint32_t self) {
    switch (phase_) {
      case Phase::Pending: start(net, dht, queue, self); break;
      case Phase::Lookup: process_lookup(net, dht, queue, self); break;
      case Phase::Store: process_store(net, dht, queue, self); break;
      case Phase::Done: throw std::logic_error("advance on finished op");
    }
  }

 private:
  struct Slot {
    std::uint32_t target;
    OutcomeKind kind;
    std::uint64_t complete_us;
  };

  void start(Network& net, const DhtParams& dht,
             EventQueue<std::uint32_t>& queue, std::uint32_t self) {
    cursor_us_ = queue.now_us();
    rec_.start_us = cursor_us_;
    phase_ = Phase::Lookup;
    slots_.reserve(dht.alpha);

    // A value held by the origin itself needs no network round-trip.
    if (rec_.op_type == OpType::LookupValue && net.holds(key_, rec_.origin)) {
      rec_.end_us = cursor_us_;
      rec_.success = true;
      finish();
      return;
    }

    auto seed_cands = net.table(rec_.origin)
                          .closest(net.ids(), key_, std::size_t(dht.beta));
    cand_ids_.reserve(seed_cands.size() * 4);
    cand_st_.reserve(seed_cands.size() * 4);
    for (std::uint32_t c : seed_cands) insert_candidate(net, c);
    // The origin knows itself; it competes for the result set like any
    // responded peer but is never dialed.
    insert_self(net);

    refill(net, dht);
    if (pipeline_empty()) {
      finish_lookup(net, dht, queue, self);
    } else {
      schedule_head(queue, self);
    }
  }

  void process_lookup(Network& net, const DhtParams& dht,
                      EventQueue<std::uint32_t>& queue, std::uint32_t self) {
    Slot s = pop_head();
    cursor_us_ = std::max(cursor_us_, s.complete_us);
    ++rec_.hops;

    bool value_found = false;
    if (s.kind == OutcomeKind::Success) {
      set_state(net, s.target, kResponded);
      if (rec_.op_type == OpType::LookupValue && net.holds(key_, s.target)) {
        value_found = true;
      } else {
        bool progressed = merge_response(net, dht, s.target);
        stall_ = progressed ? 0 : stall_ + 1;
      }
    } else {
      set_state(net, s.target, kFailed);
      if (s.kind == OutcomeKind::FastError) ++rec_.failed_fast;
      if (s.kind == OutcomeKind::SlowError) ++rec_.failed_slow;
      ++stall_;
    }

    if (value_found) {
      rec_.success = true;
      finish_lookup(net, dht, queue, self);
      return;
    }
    if (stall_ >= dht.stall_limit || converged(net, dht)) {
      finish_lookup(net, dht, queue, self);
      return;
    }
    refill(net, dht);
    if (pipeline_empty()) {
      finish_lookup(net, dht, queue, self);  // candidates exhausted
      return;
    }
    schedule_head(queue, self);
  }

  void finish_lookup(Network& net, const DhtParams& dht,
                     EventQueue<std::uint32_t>& queue, std::uint32_t self) {
    rec_.end_us = cursor_us_;
    collect_result(net, dht);
    if (rec_.op_type == OpType::LookupNodes) {
      rec_.success = !result_.empty();
      finish();
      return;
    }
    if (rec_.op_type == OpType::LookupValue) {
      // success was set when the value came back; not-found is a result.
      finish();
      return;
    }
    // Provide: one store round-trip per found node, through the same
    // alpha-wide pipeline the lookup used.
    if (result_.empty()) {
      rec_.success = false;
      finish();
      return;
    }
    phase_ = Phase::Store;
    slots_.clear();
    head_ = 0;
    next_store_ = 0;
    refill_stores(net, dht);
    if (pipeline_empty()) {
      rec_.success = !rec_.stored_on.empty();
      finish();
      return;
    }
    schedule_head(queue, self);
  }

  void process_store(Network& net, const DhtParams& dht,
                     EventQueue<std::uint32_t>& queue, std::uint32_t self) {
    Slot s = pop_head();
    cursor_us_ = std::max(cursor_us_, s.complete_us);
    if (s.kind == OutcomeKind::Success) {
      rec_.stored_on.push_back(s.target);
      net.add_holder(key_, s.target);
    }
    refill_stores(net, dht);
    if (pipeline_empty()) {
      rec_.end_us = cursor_us_;
      rec_.success = !rec_.stored_on.empty();
      finish();
      return;
    }
    schedule_head(queue, self);
  }

  void finish() {
    phase_ = Phase::Done;
    cand_ids_ = {};
    cand_st_ = {};
    slots_ = {};
  }

  // --- pipeline -----------------------------------------------------------

  Slot pop_head() { return slots_[head_++]; }

  bool pipeline_empty() const { return head_ == slots_.size(); }

  // Lookups keep at most alpha queries in flight; store pushes are one-shot
  // writes with no response to process, so provides push them through a
  // wider window.
  bool pipeline_full(const DhtParams& dht) const {
    int window = phase_ == Phase::Store ? dht.store_window : dht.alpha;
    return slots_.size() - head_ >= std::size_t(window);
  }

  void schedule_head(EventQueue<std::uint32_t>& queue, std::uint32_t self) {
    queue.schedule(std::max(cursor_us_, slots_[head_].complete_us), self);
  }

  void dispatch(Network& net, std::uint32_t target) {
    ConnectionOutcome oc = net.connect(rec_.origin, target, rng_);
    if (head_ > 0 && slots_.size() == std::size_t(head_)) {
      slots_.clear();
      head_ = 0;
    }
    slots_.push_back({target, oc.kind, cursor_us_ + oc.delay_us});
  }

  void refill(Network& net, const DhtParams& dht) {
    while (!pipeline_full(dht)) {
      std::int64_t next = next_unqueried();
      if (next < 0) break;
      cand_st_[next] = kInflight;
      dispatch(net, cand_ids_[next]);
    }
  }

  void refill_stores(Network& net, const DhtParams& dht) {
    while (!pipeline_full(dht) && next_store_ < result_.size()) {
      std::uint32_t target = result_[next_store_++];
      if (target == rec_.origin) {
        // Storing on itself is a local write: no dial, no delay.
        rec_.stored_on.push_back(target);
        net.add_holder(key_, target);
        continue;
      }
      dispatch(net, target);
    }
  }

  // --- candidate set ------------------------------------------------------

  static constexpr std::uint8_t kUnqueried = 0;
  static constexpr std::uint8_t kInflight = 1;
  static constexpr std::uint8_t kResponded = 2;
  static constexpr std::uint8_t kFailed = 3;

  std::int64_t next_unqueried() const {
    for (std::size_t i = 0; i < cand_st_.size(); ++i) {
      if (cand_st_[i] == kUnqueried) return std::int64_t(i);
    }
    return -1;
  }

  void set_state(const Network& net, std::uint32_t target, std::uint8_t st) {
    std::size_t pos = find_candidate(net, target);
    cand_st_[pos] = st;
  }

  std::size_t find_candidate(const Network& net, std::uint32_t target) const {
    const auto& ids = net.ids();
    std::size_t lo = 0, hi = cand_ids_.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (closer(ids[cand_ids_[mid]], ids[target], key_)) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

  // Inserts keeping the list sorted by distance; duplicates and the origin
  // are dropped. Returns true when actually inserted.
  bool insert_candidate(const Network& net, std::uint32_t c) {
    if (c == rec_.origin) return false;
    std::size_t pos = find_candidate(net, c);
    if (pos < cand_ids_.size() && cand_ids_[pos] == c) return false;
    cand_ids_.insert(cand_ids_.begin() + pos, c);
    cand_st_.insert(cand_st_.begin() + pos, kUnqueried);
    return true;
  }

  void insert_self(const Network& net) {
    std::size_t pos = find_candidate(net, rec_.origin);
    cand_ids_.insert(cand_ids_.begin() + pos, rec_.origin);
    cand_st_.insert(cand_st_.begin() + pos, kResponded);
  }

  // Distance bound of the k-th closest live candidate; candidates past the
  // bound bring no progress. Returns false when fewer than k live ones exist
  // (any new candidate counts as progress then).
  bool kth_live_bound(const Network& net, const DhtParams& dht,
                      U256& bound) const {
    int live = 0;
    for (std::size_t i = 0; i < cand_ids_.size(); ++i) {
      if (cand_st_[i] == kFailed) continue;
      if (++live == dht.k) {
        bound = net.ids()[cand_ids_[i]] ^ key_;
        return true;
      }
    }
    return false;
  }

  bool merge_response(Network& net, const DhtParams& dht,
                      std::uint32_t responder) {
    U256 bound{};
    bool bounded = kth_live_bound(net, dht, bound);
    auto peers = net.table(responder).closest(net.ids(), key_,
                                              std::size_t(dht.beta));
    bool progressed = false;
    for (std::uint32_t c : peers) {
      if (insert_candidate(net, c)) {
        if (!bounded || (net.ids()[c] ^ key_) < bound) progressed = true;
      }
    }
    return progressed;
  }

  bool converged(const Network& net, const DhtParams& dht) const {
    int live = 0;
    for (std::size_t i = 0; i < cand_ids_.size(); ++i) {
      if (cand_st_[i] == kFailed) continue;
      if (cand_st_[i] != kResponded) return false;
      if (++live == dht.k) return true;
    }
    return live > 0;  // fewer than k live candidates, but all responded
  }

  void collect_result(const Network& net, const DhtParams& dht) {
    result_.reserve(dht.k);
    for (std::size_t i = 0; i < cand_ids_.size() && result_.size() < std::size_t(dht.k); ++i) {
      if (cand_st_[i] != kFailed) result_.push_back(cand_ids_[i]);
    }
  }

  Rng rng_;
  U256 key_;
  OpRecord rec_;
  std::vector<std::uint32_t> result_;

  std::vector<std::uint32_t> cand_ids_;  // sorted by distance to key_
  std::vector<std::uint8_t> cand_st_;
  std::vector<Slot> slots_;
  std::size_t head_ = 0;
  std::size_t next_store_ = 0;
  std::uint64_t cursor_us_ = 0;
  int stall_ = 0;
  Phase phase_ = Phase::Pending;
};

// Runs a batch of operations that all start at the current queue time and
// drives the queue until every operation has finished.
inline void run_batch(Network& net, const DhtParams& dht,
                      std::vector<LookupOp>& ops) {
  EventQueue<std::uint32_t> queue;
  for (std::uint32_t i = 0; i < ops.size(); ++i) queue.schedule(0, i);
  while (!queue.empty()) {
    auto [t, idx] = queue.pop();
    ops[idx].advance(net, dht, queue, idx);
  }
}

}  // namespace kadsim
