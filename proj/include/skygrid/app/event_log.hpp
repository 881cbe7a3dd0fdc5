#pragma once

#include <ostream>
#include <vector>

#include <json.hpp>

namespace skygrid::app {

using Json = nlohmann::ordered_json;

// Receives simulation event records `{t_us, entity, kind, ...}`.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void record(const Json& event) = 0;
};

// Newline-delimited JSON, one record per line.
class NdjsonEventLog final : public EventSink {
 public:
  explicit NdjsonEventLog(std::ostream& out) : out_(out) {}
  void record(const Json& event) override;

 private:
  std::ostream& out_;
};

class MemoryEventLog final : public EventSink {
 public:
  void record(const Json& event) override { records_.push_back(event); }
  const std::vector<Json>& records() const noexcept { return records_; }

 private:
  std::vector<Json> records_;
};

}  // namespace skygrid::app
