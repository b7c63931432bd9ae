#pragma once

#include <stdexcept>
#include <string>

namespace pw {

// Raised when an operation's inputs fall outside its domain. The CLI maps
// this to exit code 2 and prints what() verbatim.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pw
