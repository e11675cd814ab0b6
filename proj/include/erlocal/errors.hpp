#pragma once

#include <stdexcept>
#include <string>

namespace erlocal {

/// Invalid parameters or data, detected before any computation.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A factorization or solve failed (singular shift, LAPACK error code).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace erlocal
