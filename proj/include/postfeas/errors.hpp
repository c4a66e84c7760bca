#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace postfeas {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Pivot magnitudes collapsed below tolerance even after refactorization.
class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

class SizeLimitExceeded : public Error {
 public:
  using Error::Error;
};

class SingularPrecision : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class CountOutOfRange : public Error {
 public:
  using Error::Error;
};

class MaxRoundsExceeded : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

/// Malformed JSON/CSV input or a schema violation.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A coverage constraint cannot be met by any panel of the allowed size.
class PanelInfeasible : public Error {
 public:
  PanelInfeasible(const std::string& what, std::string cluster)
      : Error(what), cluster_(std::move(cluster)) {}
  const std::string& cluster() const { return cluster_; }

 private:
  std::string cluster_;
};

}  // namespace postfeas
