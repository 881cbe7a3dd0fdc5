#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "skygrid/sim/time.hpp"

namespace skygrid::sim {

enum class EntityId : std::uint32_t {};

struct EventHandle {
  std::uint64_t seq = 0;
};

// What the engine reports for each event it delivers. `kind` must refer to
// storage that outlives the engine (string literals in practice).
struct FiredEvent {
  SimTime fire_at;
  std::uint64_t seq;
  EntityId target;
  std::string_view kind;
};

class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Single-threaded discrete-event loop. Events fire in (fire_at, seq) order,
// where seq is the insertion counter, so equal-time events keep their
// scheduling order and every run with the same inputs replays identically.
class Engine {
 public:
  using Action = std::function<void()>;
  using Observer = std::function<void(const FiredEvent&)>;

  EventHandle schedule(SimTime fire_at, EntityId target, std::string_view kind, Action action);
  EventHandle schedule_after(Duration delay, EntityId target, std::string_view kind, Action action) {
    return schedule(now_ + delay, target, kind, std::move(action));
  }

  // Processes every event with fire_at <= t_end, then sets the clock to t_end.
  SimTime run_until(SimTime t_end);

  SimTime now() const noexcept { return now_; }
  std::size_t pending() const noexcept { return heap_.size(); }
  std::uint64_t fired() const noexcept { return fired_; }

  void set_observer(Observer observer) { observer_ = std::move(observer); }

 private:
  struct Entry {
    SimTime fire_at;
    std::uint64_t seq;
    EntityId target;
    std::string_view kind;
    Action action;
  };
  // Min-heap on (fire_at, seq) via std::push_heap's max-heap convention.
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  std::vector<Entry> heap_;
  SimTime now_{};
  std::uint64_t next_seq_ = 0;
  std::uint64_t fired_ = 0;
  Observer observer_;
};

}  // namespace skygrid::sim
