#include "skygrid/sim/engine.hpp"

#include <algorithm>
#include <string>

namespace skygrid::sim {

EventHandle Engine::schedule(SimTime fire_at, EntityId target, std::string_view kind,
                             Action action) {
  if (fire_at < now_) {
    throw SchedulingError("event '" + std::string(kind) + "' scheduled at " +
                          std::to_string(to_us(fire_at)) + "us, before current time " +
                          std::to_string(to_us(now_)) + "us");
  }
  const std::uint64_t seq = next_seq_++;
  heap_.push_back(Entry{fire_at, seq, target, kind, std::move(action)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return EventHandle{seq};
}

SimTime Engine::run_until(SimTime t_end) {
  if (t_end < now_) {
    throw SchedulingError("run_until(" + std::to_string(to_us(t_end)) +
                          "us) is before current time " + std::to_string(to_us(now_)) + "us");
  }
  while (!heap_.empty() && heap_.front().fire_at <= t_end) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Entry entry = std::move(heap_.back());
    heap_.pop_back();

    now_ = entry.fire_at;
    ++fired_;
    if (observer_) observer_(FiredEvent{entry.fire_at, entry.seq, entry.target, entry.kind});
    if (entry.action) entry.action();
  }
  now_ = t_end;
  return now_;
}

}  // namespace skygrid::sim
