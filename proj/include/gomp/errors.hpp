#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace gomp {

/// Bad dimensions, malformed index sets, violated preconditions.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A least-squares subsystem whose columns are (numerically) dependent.
class SingularSystemError : public std::runtime_error {
 public:
  explicit SingularSystemError(const std::string& what,
                               std::optional<std::int64_t> iteration = std::nullopt)
      : std::runtime_error(what), iteration_(iteration) {}

  /// Pursuit iteration (1-based) at which the failure happened, if known.
  std::optional<std::int64_t> iteration() const { return iteration_; }

 private:
  std::optional<std::int64_t> iteration_;
};

/// Exhaustive enumeration refused because it would exceed the subset budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, double required, double budget)
      : std::runtime_error(what), required_(required), budget_(budget) {}

  double required() const { return required_; }
  double budget() const { return budget_; }

 private:
  double required_;
  double budget_;
};

/// A closed-form expression evaluated outside the region where it is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration (CLI config files, trial specs).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gomp
