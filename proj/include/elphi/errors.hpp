#pragma once

#include <stdexcept>
#include <string>

namespace elphi {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Divergence-family parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Iterative method exhausted its iteration budget.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, int iterations)
      : std::runtime_error(what), iterations(iterations) {}
  int iterations;
};

// Linear system matrix is numerically singular.
class SingularJacobian : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No multiplier root found from any start; carries the best residual seen.
class NoRoot : public std::runtime_error {
 public:
  NoRoot(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual(best_residual) {}
  double best_residual;
};

// The half-space system for the multiplier is empty (contradicts the
// convex-hull condition; indicates corrupt input).
class InfeasiblePolyhedron : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A weight constraint 1 + t'g_i >= 1/n is violated at observation `index`.
class ConstraintViolation : public std::runtime_error {
 public:
  ConstraintViolation(const std::string& what, int index)
      : std::runtime_error(what), index(index) {}
  int index;
};

// Requested power/sample-size quantity is undefined (sigma^2 = 0 or
// beta_star = beta_null).
class DegenerateAlternative : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace elphi
