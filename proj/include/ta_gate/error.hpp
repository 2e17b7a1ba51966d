#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ta_gate {

/// Base of every error raised by the library. `kind()` is a stable short
/// name (e.g. "InvalidProblem", "CassetteMiss") suitable for error tables.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

}  // namespace ta_gate
