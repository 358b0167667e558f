#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kadsim {

// Time-ordered event queue driving the virtual clock. Time is integer
// microseconds; two events at the same instant fire in insertion order, which
// keeps every run fully deterministic.
template <class Event>
class EventQueue {
 public:
  std::uint64_t now_us() const { return now_us_; }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

  // Schedules `ev` at absolute time `at_us`. Scheduling in the past is a
  // logic error: the clock never moves backwards.
  void schedule(std::uint64_t at_us, Event ev) {
    if (at_us < now_us_) {
      throw std::invalid_argument("schedule: event time is in the past");
    }
    heap_.push(Item{at_us, seq_++, std::move(ev)});
  }

  // Pops the earliest event and advances the clock to its timestamp.
  std::pair<std::uint64_t, Event> pop() {
    if (heap_.empty()) throw std::logic_error("pop: queue is empty");
    Item top = heap_.top();
    heap_.pop();
    now_us_ = top.at_us;
    return {top.at_us, std::move(top.ev)};
  }

 private:
  struct Item {
    std::uint64_t at_us;
    std::uint64_t seq;
    Event ev;
    bool operator>(const Item& o) const {
      if (at_us != o.at_us) return at_us > o.at_us;
      return seq > o.seq;
    }
  };

  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap_;
  std::uint64_t now_us_ = 0;
  std::uint64_t seq_ = 0;
};

}  // namespace kadsim
