#pragma once

#include <stdexcept>
#include <string>

namespace qmg {

// Argument outside the mathematical domain of an operation (non-positive
// amount, scale, width, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Coincident or otherwise degenerate geometric configuration.
class DegenerateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A numerical procedure failed to converge or to bracket.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition on a value (unnormalized
// wavefunction, too much mass at the grid boundary, ...).
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace qmg
