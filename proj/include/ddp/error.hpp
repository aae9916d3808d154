#pragma once

#include <stdexcept>
#include <string>

namespace ddp {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed file, invalid field, unknown name.
struct ConfigError : Error {
  std::string field;
  ConfigError(std::string field_, const std::string& msg)
      : Error("config error in '" + field_ + "': " + msg), field(std::move(field_)) {}
};

// Training loss went non-finite.
struct DivergenceError : Error {
  int step;
  explicit DivergenceError(int step_)
      : Error("loss became non-finite at step " + std::to_string(step_)), step(step_) {}
};

// Path enumeration would exceed the configured limit.
struct PathLimitError : Error {
  unsigned long long count_lower_bound;
  PathLimitError(unsigned long long count, unsigned long long limit)
      : Error("path count " + std::to_string(count) + " exceeds limit " + std::to_string(limit)),
        count_lower_bound(count) {}
};

}  // namespace ddp
