#pragma once

#include <stdexcept>
#include <string>

namespace rigidlab {

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Candidate violates the sum constraint of a sum-conditioned density.
struct ConstraintError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No admissible configuration could be produced.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A Markov chain accepted nothing over its whole run.
struct MixingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rigidlab
