#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfill {

enum class ErrorCode {
  // semimetric_core
  AsymmetricMatrix,
  NonzeroDiagonal,
  NonpositiveOffDiagonal,
  TooFewPoints,
  NotSquare,
  DiameterNotOne,
  MissingAntipode,
  NonDistinctPoints,
  DimensionMismatch,
  NotMoebiusEquivalent,
  // moebius_space
  BaseMismatch,
  NonfiniteState,
  BudgetExceeded,
  RayConstructionFailed,
  NotAntipodalWithinTol,
  PairwiseConditionViolated,
  // rough_isometry
  ExactBudgetExceeded,
  NotAMetric,
  // filling / boundary
  NotACover,
  AmbiguousShadow,
  RayPointUnmapped,
  ComponentCountMismatch,
  // gallery
  OddNRequiresRepair,
  EtaTooLarge,
  InvalidParameter,
  // io / cli
  SchemaMismatch,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorCode::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorCode::NonpositiveOffDiagonal: return "NonpositiveOffDiagonal";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::DiameterNotOne: return "DiameterNotOne";
    case ErrorCode::MissingAntipode: return "MissingAntipode";
    case ErrorCode::NonDistinctPoints: return "NonDistinctPoints";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotMoebiusEquivalent: return "NotMoebiusEquivalent";
    case ErrorCode::BaseMismatch: return "BaseMismatch";
    case ErrorCode::NonfiniteState: return "NonfiniteState";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::RayConstructionFailed: return "RayConstructionFailed";
    case ErrorCode::NotAntipodalWithinTol: return "NotAntipodalWithinTol";
    case ErrorCode::PairwiseConditionViolated: return "PairwiseConditionViolated";
    case ErrorCode::ExactBudgetExceeded: return "ExactBudgetExceeded";
    case ErrorCode::NotAMetric: return "NotAMetric";
    case ErrorCode::NotACover: return "NotACover";
    case ErrorCode::AmbiguousShadow: return "AmbiguousShadow";
    case ErrorCode::RayPointUnmapped: return "RayPointUnmapped";
    case ErrorCode::ComponentCountMismatch: return "ComponentCountMismatch";
    case ErrorCode::OddNRequiresRepair: return "OddNRequiresRepair";
    case ErrorCode::EtaTooLarge: return "EtaTooLarge";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Budget errors map to CLI exit code 3; everything else is a validation
/// failure (exit code 2).
constexpr bool is_budget_error(ErrorCode c) {
  return c == ErrorCode::BudgetExceeded || c == ErrorCode::ExactBudgetExceeded;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace mfill
