#pragma once

#include <stdexcept>
#include <string>

namespace regiosim {

/// Error families surfaced by the library. Codes marked as input errors
/// describe defects in user-supplied data or configuration; the rest are
/// runtime/computation failures. The CLI maps the former to exit code 2
/// and the latter to exit code 1.
enum class ErrorCode {
  // configuration / input validation
  ParameterOutOfRange,
  DivergentRegime,
  DimensionMismatch,
  DuplicateRegion,
  CoordinateOutOfRange,
  BoundaryNotIncreasing,
  SchemaError,
  UnbalancedPanel,
  NonPositive,
  NonPositiveInitialGrowth,
  ZeroDistance,
  ZeroResponse,
  InsufficientPermutations,
  RankDeficient,
  NoWithinVariation,
  HeterogeneousMu,
  ConfigError,
  IoError,
  // runtime / computation
  NonFiniteState,
  SingularSystem,
  DegenerateField,
  NonFiniteLikelihood,
  DidNotConverge,
  NotConverged,
  IncompatibleFits,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::DivergentRegime: return "DivergentRegime";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateRegion: return "DuplicateRegion";
    case ErrorCode::CoordinateOutOfRange: return "CoordinateOutOfRange";
    case ErrorCode::BoundaryNotIncreasing: return "BoundaryNotIncreasing";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnbalancedPanel: return "UnbalancedPanel";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::NonPositiveInitialGrowth: return "NonPositiveInitialGrowth";
    case ErrorCode::ZeroDistance: return "ZeroDistance";
    case ErrorCode::ZeroResponse: return "ZeroResponse";
    case ErrorCode::InsufficientPermutations: return "InsufficientPermutations";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NoWithinVariation: return "NoWithinVariation";
    case ErrorCode::HeterogeneousMu: return "HeterogeneousMu";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DegenerateField: return "DegenerateField";
    case ErrorCode::NonFiniteLikelihood: return "NonFiniteLikelihood";
    case ErrorCode::DidNotConverge: return "DidNotConverge";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::IncompatibleFits: return "IncompatibleFits";
  }
  return "Unknown";
}

/// True for error families caused by bad input rather than a failed
/// computation.
inline bool is_input_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonFiniteState:
    case ErrorCode::SingularSystem:
    case ErrorCode::DegenerateField:
    case ErrorCode::NonFiniteLikelihood:
    case ErrorCode::DidNotConverge:
    case ErrorCode::NotConverged:
    case ErrorCode::IncompatibleFits:
      return false;
    default:
      return true;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  bool input_error() const noexcept { return is_input_error(code_); }

 private:
  ErrorCode code_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool cond, ErrorCode code, const std::string& message) {
  if (!cond) fail(code, message);
}

}  // namespace detail

}  // namespace regiosim
