#pragma once

#include <stdexcept>
#include <string>

namespace factlab {

// Failure categories. Numeric values are shared with the C API status codes
// declared in include/factlab.h, so keep the two lists in sync.
enum class Status {
  ok = 0,
  invalid_argument = 1,
  budget_exceeded = 2,
  cap_exceeded = 3,
  not_found = 4,
  corrupt_data = 5,
  verify_failed = 6,
  io_error = 7,
  internal = 8,
};

class Error : public std::runtime_error {
public:
  Error(Status status, const std::string& message)
      : std::runtime_error(message), status_(status) {}

  Status status() const noexcept { return status_; }

private:
  Status status_;
};

[[noreturn]] inline void fail(Status status, const std::string& message) {
  throw Error(status, message);
}

}  // namespace factlab
