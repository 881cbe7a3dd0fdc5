#pragma once

#include <stdexcept>
#include <string>

namespace skygrid {

// Invalid scenario or model parameters. `field()` is the dotted scenario key
// the problem was found in (e.g. "grid.spacing"), empty when not applicable.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A runtime check on simulation state failed. Batch runs abort on this.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace skygrid
