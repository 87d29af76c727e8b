#pragma once

#include <stdexcept>
#include <string>

namespace qplas {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter or precondition was violated by the caller.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// An evaluation point lies outside a tabulated or physical domain.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Analysis could not produce a defined estimate from the given data.
class AnalysisError : public Error {
public:
  enum class Kind {
    UndefinedNormalization,
    UndefinedStatistics,
    ZeroNorm,
    GridMismatch,
  };

  AnalysisError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

/// A least-squares fit failed to converge or was underdetermined.
class FitError : public Error {
public:
  using Error::Error;
};

}  // namespace qplas
