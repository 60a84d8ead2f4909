#pragma once

#include <stdexcept>
#include <string>

namespace compact_markov {

/// Invalid state or argument outside an operation's domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A chain description that cannot produce a stochastic kernel.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DivisionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a sampled function returns a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The caller asked for an analysis whose hypothesis does not hold
/// (reducible chain, uncertified tightness set, non-reversible measure, ...).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace compact_markov
