#pragma once

#include <stdexcept>
#include <string>

namespace floq {

// Invalid parameters or inputs that violate a documented precondition.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computed quantity broke a numerical tolerance (non-unitary monodromy,
// incomplete mode basis, eigen-solver failure).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two quasienergies coincide, so their interference period is infinite.
class DegeneratePairError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace floq
