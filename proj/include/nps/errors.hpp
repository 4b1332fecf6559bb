#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nps {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid or parameter values that violate their invariants.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// Requested time step exceeds the stability bound of the scheme.
class TimeStepTooLarge : public Error {
 public:
  TimeStepTooLarge(double dt, double bound)
      : Error("time step " + std::to_string(dt) + " exceeds stability bound " + std::to_string(bound)),
        dt(dt),
        bound(bound) {}
  double dt;
  double bound;
};

/// Input data failed validation; every violation is listed.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations(std::move(violations)) {}
  std::vector<std::string> violations;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "validation failed:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
};

/// Malformed configuration text or expression.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, std::string field = {})
      : Error(format(what, line, field)), line(line), field(std::move(field)) {}
  int line;
  std::string field;

 private:
  static std::string format(const std::string& what, int line, const std::string& field) {
    std::string out = "parse error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " in '" + field + "'";
    return out + ": " + what;
  }
};

/// An iterative solver hit its iteration or time cap.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

}  // namespace nps
