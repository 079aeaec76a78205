#pragma once

#include <stdexcept>
#include <string>

namespace wstokes {

/// Thrown when an operation's input violates its documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace wstokes
