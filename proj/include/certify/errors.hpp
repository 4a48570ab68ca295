#pragma once

#include <stdexcept>
#include <string>

namespace certify {

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejection sampler exhausted its attempt budget for one draw.
struct RejectionBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A matrix factorization failed even after jitter escalation.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OptimizationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sum of prediction weights 2q-1 is not positive, the debiased
// estimator is undefined on such a record set.
struct DegenerateWeights : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace certify
