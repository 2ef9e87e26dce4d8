#ifndef ECONORDER_ERROR_HPP
#define ECONORDER_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace econorder {

enum class ErrorKind {
  structural,      // shape mismatch between arguments
  domain,          // argument outside the operation's domain
  infeasible,      // no economic order satisfies the constraints
  nonconvergence,  // iterative method gave up
  cap_exceeded,    // enumeration would exceed the configured cap
  singularity,     // Bose-Einstein denominator reached zero
  parse,           // malformed config or data file
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::structural: return "structural";
    case ErrorKind::domain: return "domain";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::nonconvergence: return "nonconvergence";
    case ErrorKind::cap_exceeded: return "cap_exceeded";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::parse: return "parse";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Process exit code for an error kind: 2 infeasible, 3 non-convergence,
/// 4 cap exceeded, 1 anything else.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::infeasible: return 2;
    case ErrorKind::nonconvergence: return 3;
    case ErrorKind::cap_exceeded: return 4;
    default: return 1;
  }
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace econorder

#endif  // ECONORDER_ERROR_HPP
