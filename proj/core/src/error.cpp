#include "gbpl/error.hpp"

namespace gbpl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularGeometry: return "SingularGeometry";
    case ErrorCode::NotLineOfSight: return "NotLineOfSight";
    case ErrorCode::AllPathsDegenerate: return "AllPathsDegenerate";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::IsolatedNode: return "IsolatedNode";
    case ErrorCode::NoMessages: return "NoMessages";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::MismatchedNodeSets: return "MismatchedNodeSets";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidReflection: return "InvalidReflection";
    case ErrorCode::CoincidentNodes: return "CoincidentNodes";
    case ErrorCode::ScenarioInfeasible: return "ScenarioInfeasible";
    case ErrorCode::UnreachableNode: return "UnreachableNode";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::RankDeficientSystem: return "RankDeficientSystem";
    case ErrorCode::TooManyUnknowns: return "TooManyUnknowns";
    case ErrorCode::SenderIdOverflow: return "SenderIdOverflow";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::TruncatedFrame: return "TruncatedFrame";
    case ErrorCode::NonFiniteField: return "NonFiniteField";
    case ErrorCode::RoundTimeout: return "RoundTimeout";
    case ErrorCode::SocketError: return "SocketError";
    case ErrorCode::EmptySamples: return "EmptySamples";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message) {}

}  // namespace gbpl
