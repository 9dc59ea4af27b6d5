#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dekernel {

enum class ErrorCode {
  NonPositiveBandwidth,
  UnsupportedOrder,
  InvalidModel,
  NonPositiveState,
  SolutionUndefined,
  StateCollapse,
  DegreeOutOfRange,
  InvalidDataset,
  InsufficientLocalData,
  SingularDesign,
  EmptyGrid,
  IterateLeftDomain,
  WrongAlpha,
  DegenerateDenominator,
  EmptyBracket,
  DegenerateBias,
  AllBandwidthsInfeasible,
  NonPositiveData,
  DegenerateDesign,
  NearZeroSlope,
  NoFeasibleLambda,
  NoConvergence,
  IndexOutOfRange,
  ConfigInvalid,
  FileNotFound,
  ParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveBandwidth: return "NonPositiveBandwidth";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::NonPositiveState: return "NonPositiveState";
    case ErrorCode::SolutionUndefined: return "SolutionUndefined";
    case ErrorCode::StateCollapse: return "StateCollapse";
    case ErrorCode::DegreeOutOfRange: return "DegreeOutOfRange";
    case ErrorCode::InvalidDataset: return "InvalidDataset";
    case ErrorCode::InsufficientLocalData: return "InsufficientLocalData";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::IterateLeftDomain: return "IterateLeftDomain";
    case ErrorCode::WrongAlpha: return "WrongAlpha";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::EmptyBracket: return "EmptyBracket";
    case ErrorCode::DegenerateBias: return "DegenerateBias";
    case ErrorCode::AllBandwidthsInfeasible: return "AllBandwidthsInfeasible";
    case ErrorCode::NonPositiveData: return "NonPositiveData";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::NearZeroSlope: return "NearZeroSlope";
    case ErrorCode::NoFeasibleLambda: return "NoFeasibleLambda";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace dekernel
