#pragma once

#include <stdexcept>
#include <string>

namespace tavg {

// Malformed user input: bad literals, violated preconditions.
struct invalid_input : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numerical routine could not reach its stated accuracy.
struct numerical_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The base point sits too close to a critical value of the iterate.
struct non_simple_fiber : numerical_failure {
  using numerical_failure::numerical_failure;
};

// A configured size or iteration cap was hit.
struct budget_exceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tavg
