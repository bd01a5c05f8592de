#pragma once

#include <stdexcept>
#include <string>

namespace shadowval {

// Error taxonomy shared by the library and the CLI exit codes:
// invalid_input -> 1, budget_exceeded -> 2, solver_failure -> 3.
enum class ErrorKind { invalid_input = 1, budget_exceeded = 2, solver_failure = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

}  // namespace shadowval
