#pragma once

#include <stdexcept>
#include <string>

namespace ramify {

enum class ErrorCode {
  MalformedGluing,
  DepthOverflow,
  UnknownBuiltin,
  LevelOutOfRange,
  DistinctPointsRequired,
  DepthInsufficient,
  InsufficientDepth,
  MissingCellSamples,
  AlphaRange,
  AdmissibilityRequired,
  DegreeCollapse,
  NoRepellingSeed,
  NotInvariant,
  CoverCountMismatch,
  InjectivityWitness,
  UnstableClustering,
  GluingAmbiguity,
  BoundaryMismatch,
  NotABranch,
  ContextMismatch,
  UnresolvedPrefix,
  NotPiecewiseCellular,
  BadInput,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::MalformedGluing: return "MalformedGluing";
    case ErrorCode::DepthOverflow: return "DepthOverflow";
    case ErrorCode::UnknownBuiltin: return "UnknownBuiltin";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::DistinctPointsRequired: return "DistinctPointsRequired";
    case ErrorCode::DepthInsufficient: return "DepthInsufficient";
    case ErrorCode::InsufficientDepth: return "InsufficientDepth";
    case ErrorCode::MissingCellSamples: return "MissingCellSamples";
    case ErrorCode::AlphaRange: return "AlphaRange";
    case ErrorCode::AdmissibilityRequired: return "AdmissibilityRequired";
    case ErrorCode::DegreeCollapse: return "DegreeCollapse";
    case ErrorCode::NoRepellingSeed: return "NoRepellingSeed";
    case ErrorCode::NotInvariant: return "NotInvariant";
    case ErrorCode::CoverCountMismatch: return "CoverCountMismatch";
    case ErrorCode::InjectivityWitness: return "InjectivityWitness";
    case ErrorCode::UnstableClustering: return "UnstableClustering";
    case ErrorCode::GluingAmbiguity: return "GluingAmbiguity";
    case ErrorCode::BoundaryMismatch: return "BoundaryMismatch";
    case ErrorCode::NotABranch: return "NotABranch";
    case ErrorCode::ContextMismatch: return "ContextMismatch";
    case ErrorCode::UnresolvedPrefix: return "UnresolvedPrefix";
    case ErrorCode::NotPiecewiseCellular: return "NotPiecewiseCellular";
    case ErrorCode::BadInput: return "BadInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

}  // namespace ramify
