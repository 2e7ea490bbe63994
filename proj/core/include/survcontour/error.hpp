#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace survcontour {

// Base for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed CSV, missing column, invalid roles, invalid model spec.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A single offending field plus message, used for field-level reporting.
struct Violation {
  std::string field;
  std::string message;
};

// Validation failure carrying one entry per offending field.
class SpecViolationError : public ValidationError {
 public:
  explicit SpecViolationError(std::vector<Violation> violations)
      : ValidationError(join(violations)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<Violation>& v) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += "; ";
      out += item.field + ": " + item.message;
    }
    return out;
  }

  std::vector<Violation> violations_;
};

// Design matrix is not of full column rank.
class RankDeficiencyError : public ValidationError {
 public:
  RankDeficiencyError(const std::string& what, std::vector<std::string> columns)
      : ValidationError(what), columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

// Optimizer failed to converge (iteration cap, monotone likelihood).
class NonconvergenceError : public Error {
 public:
  using Error::Error;
};

// Requested feature is not available for the model family (e.g. CI for RSF).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace survcontour
