#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace joap {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Admitted load reaches or exceeds the charging capacity (rho >= 1).
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Moment targets cannot be met by a two-branch exponential mixture.
class InfeasibleFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear system has no unique stationary solution.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration file (syntax or structure).
class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration parsed but violates one or more invariants. Every
/// violation is collected before throwing.
class ConfigValidationError : public std::runtime_error {
 public:
  explicit ConfigValidationError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  std::vector<std::string> violations_;
};

}  // namespace joap
