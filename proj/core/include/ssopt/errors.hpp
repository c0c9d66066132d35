#pragma once

#include <stdexcept>
#include <string>

namespace ssopt {

/// Raised by LU-based solves when a pivot falls below the singularity threshold.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, SVD breakdown, or any other arithmetic failure.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssopt
