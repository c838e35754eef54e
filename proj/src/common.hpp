#ifndef RB_COMMON_HPP
#define RB_COMMON_HPP

#include <stdexcept>
#include <string>

namespace rb {

enum class Status {
  ok = 0,
  invalid_argument,
  domain_error,
  infeasible,
  no_convergence,
  parse_error,
  io_error,
  internal_error,
};

inline const char* status_name(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::invalid_argument: return "invalid_argument";
    case Status::domain_error: return "domain_error";
    case Status::infeasible: return "infeasible";
    case Status::no_convergence: return "no_convergence";
    case Status::parse_error: return "parse_error";
    case Status::io_error: return "io_error";
    case Status::internal_error: return "internal_error";
  }
  return "unknown";
}

// Library-wide error type. Carries the status code that the C API maps to.
class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  Status status() const { return status_; }

 private:
  Status status_;
};

[[noreturn]] inline void fail(Status status, const std::string& message) {
  throw Error(status, message);
}

inline void require(bool condition, Status status, const std::string& message) {
  if (!condition) fail(status, message);
}

}  // namespace rb

#endif
