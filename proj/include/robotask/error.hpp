#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace robotask {

enum class ErrorCode {
  // instruction-core
  UnbalancedDelimiter,
  EmptyVariableName,
  InvalidVariableName,
  // planner
  UnmatchedClause,
  UncoveredVariable,
  ConflictingVariableKind,
  AdapterFailure,
  ValidationFailure,
  // script-compiler
  UnknownLocation,
  AmbiguousLocation,
  InvalidSequence,
  // script-store
  StorageFailure,
  InvalidArgument,
  // world-sim
  SchemaViolation,
  UnreachableFloor,
  UnknownFloor,
  NoRoute,
  NothingToObserve,
  ContainerClosed,
  ItemNotPresent,
  AlreadyHolding,
  NotHolding,
  // perception
  NoTemplateForFunction,
  EmptyScene,
  InvalidNoiseConfig,
  // executor
  NothingToOffer,
  InvalidBinding,
  StaleQuestion,
  WrongPhase,
  InvalidAnswer,
  Cancelled,
  FeedbackTimeout,
  // gateway
  UnknownSession,
  MalformedMessage,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view name);

// Single exception type for every domain failure. `step_index` is attached by
// the compiler and executor; `candidates` is filled for AmbiguousLocation.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  const std::optional<std::size_t>& step_index() const noexcept { return step_index_; }
  Error& with_step(std::size_t index);

  const std::vector<std::string>& candidates() const noexcept { return candidates_; }
  Error& with_candidates(std::vector<std::string> names);

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::size_t> step_index_;
  std::vector<std::string> candidates_;
};

}  // namespace robotask
