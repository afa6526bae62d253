#pragma once

#include <stdexcept>
#include <string>

namespace isoedf {

/// Argument outside the mathematical domain of a function (non-finite input,
/// non-positive aspect ratio, frequency outside the Szego band).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Caller broke a documented precondition (non-Hermitian input, bad config).
class ContractError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative method hit its cap or produced an unusable result.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NotPsdError : public NumericError {
  public:
    using NumericError::NumericError;
};

class DegenerateSpectrumError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// Stieltjes solver failed to find the Herglotz branch at some z.
class SolverError : public NumericError {
  public:
    using NumericError::NumericError;
};

} // namespace isoedf
