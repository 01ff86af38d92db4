#pragma once

#include <stdexcept>
#include <string>

namespace wgmres {

enum class ErrorKind {
  // validation
  DimensionMismatch,
  NotHermitian,
  NotMonotone,
  ZeroInitialResidual,
  ZeroEigenvalue,
  SpectrumRange,
  LengthExceedsDimension,
  LengthMismatch,
  ZeroTrailingEntry,
  InvalidConfig,
  ParseError,
  UnsupportedField,
  IoError,
  // numerical
  RankDeficient,
  ConvergenceFailure,
  NotPositiveDefinite,
  SingularTriangular,
  SingularOperator,
  SingularPreconditioner,
  SingularSymmetricPart,
  BreakdownMismatch,
  InfeasiblePair,
  SingularValueMismatch,
  RankDeficientBasis,
  LinkMismatch,
  BasisMismatch,
  NonFinite,
};

const char* to_string(ErrorKind k);

/// True for errors caused by bad input rather than by arithmetic.
bool is_validation(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wgmres
