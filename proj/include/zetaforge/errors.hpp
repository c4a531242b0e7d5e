#pragma once
#include <stdexcept>
#include <string>

namespace zetaforge {

enum class ErrorKind {
  Domain,
  Pole,
  Convergence,
  Truncation,
  Hypothesis,
  Schema,
  Overflow,
  Calibration,
  Argument
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Pole: return "pole";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Truncation: return "truncation";
    case ErrorKind::Hypothesis: return "hypothesis";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::Calibration: return "calibration";
    case ErrorKind::Argument: return "argument";
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

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

}  // namespace zetaforge
