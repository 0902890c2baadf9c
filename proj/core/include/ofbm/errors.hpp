#pragma once

#include <stdexcept>
#include <string>

namespace ofbm {

// Invalid user input or configuration (CLI exit code 2).
class validation_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-convergence, loss of positive definiteness,
// nonpositive eigenvalues where positivity is required (CLI exit code 3).
class numerical_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Circulant embedding of the increment covariance is not nonnegative
// definite even after the bounded embedding-length doublings.
class admissibility_error : public numerical_error {
public:
  using numerical_error::numerical_error;
};

// File system / parse failures (CLI exit code 4).
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace ofbm
