#include "vcg/error.hpp"

namespace vcg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnbalancedPanel: return "UnbalancedPanel";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DuplicateRow: return "DuplicateRow";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::InvalidLag: return "InvalidLag";
    case ErrorCode::LagTooDeep: return "LagTooDeep";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TooFewKnots: return "TooFewKnots";
    case ErrorCode::NonPositiveForLog: return "NonPositiveForLog";
    case ErrorCode::MissingSeries: return "MissingSeries";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::ZeroTotalIncome: return "ZeroTotalIncome";
    case ErrorCode::ZeroIncomeCell: return "ZeroIncomeCell";
    case ErrorCode::ZeroQuintileIncome: return "ZeroQuintileIncome";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteDriver: return "NonFiniteDriver";
    case ErrorCode::UnknownDriver: return "UnknownDriver";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NotConvergedFit: return "NotConvergedFit";
    case ErrorCode::SingularMeat: return "SingularMeat";
    case ErrorCode::IdentificationFailed: return "IdentificationFailed";
    case ErrorCode::UnmappedCountry: return "UnmappedCountry";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace vcg
