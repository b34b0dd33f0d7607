#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vcg {

/// Module-level failure categories. The CLI reports these names verbatim.
enum class ErrorCode {
  MissingColumn,
  UnbalancedPanel,
  NonFiniteValue,
  DuplicateRow,
  InvalidValue,
  InvalidLag,
  LagTooDeep,
  SeriesTooShort,
  NonFiniteInput,
  InvalidConfig,
  TooFewKnots,
  NonPositiveForLog,
  MissingSeries,
  InvalidGrid,
  ZeroTotalIncome,
  ZeroIncomeCell,
  ZeroQuintileIncome,
  InvalidArgument,
  NonFiniteDriver,
  UnknownDriver,
  DimensionMismatch,
  RankDeficient,
  NonPositiveWeight,
  NotConverged,
  NotConvergedFit,
  SingularMeat,
  IdentificationFailed,
  UnmappedCountry,
  InvalidSpec,
  ParseError,
  IoError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vcg
