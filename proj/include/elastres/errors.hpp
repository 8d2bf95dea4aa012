#pragma once
// Error taxonomy shared by all modules. Each error carries a category that the
// command-line front end maps onto a process exit code.

#include <stdexcept>
#include <string>

namespace elastres {

enum class ErrorKind {
  Config,      // malformed input, invalid parameters            (exit 2)
  Numerical,   // breakdown, non-convergence, ill-conditioning   (exit 3)
  Validation,  // a checked invariant failed                     (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void config_error(const std::string& msg);
[[noreturn]] void numerical_error(const std::string& msg);
[[noreturn]] void validation_error(const std::string& msg);

int exit_code(ErrorKind kind);

}  // namespace elastres
