#include "elastres/errors.hpp"

namespace elastres {

void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }
void numerical_error(const std::string& msg) { throw Error(ErrorKind::Numerical, msg); }
void validation_error(const std::string& msg) { throw Error(ErrorKind::Validation, msg); }

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Numerical: return 3;
    case ErrorKind::Validation: return 4;
  }
  return 3;
}

}  // namespace elastres
