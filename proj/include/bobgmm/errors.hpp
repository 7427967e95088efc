#pragma once

#include <stdexcept>
#include <string>

namespace bobgmm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes of inputs disagree (rows/columns, K, d).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A covariance or scale matrix failed Cholesky factorization.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

/// A density evaluation produced +-inf or NaN.
class NonFiniteResult : public Error {
public:
    using Error::Error;
};

/// Degrees of freedom too small for the requested mode or draw.
class InvalidDof : public Error {
public:
    using Error::Error;
};

/// Posterior concentrations leave no valid Dirichlet mode.
class DegeneratePosterior : public Error {
public:
    using Error::Error;
};

/// Bad user-supplied configuration value.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace bobgmm
