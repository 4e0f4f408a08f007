#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gbpl {

enum class ErrorCode {
  // geometry
  SingularGeometry,
  NotLineOfSight,
  AllPathsDegenerate,
  RankDeficient,
  // belief propagation
  IsolatedNode,
  NoMessages,
  NumericalFailure,
  MismatchedNodeSets,
  InvalidConfig,
  // scenario generation
  InvalidReflection,
  CoincidentNodes,
  ScenarioInfeasible,
  UnreachableNode,
  InvalidScenario,
  // oracle
  RankDeficientSystem,
  TooManyUnknowns,
  // wire format and transport
  SenderIdOverflow,
  BadMagic,
  UnsupportedVersion,
  UnknownKind,
  TruncatedFrame,
  NonFiniteField,
  RoundTimeout,
  SocketError,
  // experiments
  EmptySamples,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Exception type used throughout the library. `code()` identifies the
/// failure class; `what()` carries the diagnostic text, including node,
/// edge, iteration or trial context where one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the leading code name.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace gbpl
