#pragma once

#include <stdexcept>
#include <string>

namespace dtrbench {

/// A caller broke a documented precondition (bad shape, out-of-range action, empty input).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Argument outside the mathematical domain of a function (e.g. log of a non-positive glucose).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed file or payload.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The physiological integrator produced a non-finite state.
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A training update produced a non-finite loss or parameter.
class TrainingFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace dtrbench
