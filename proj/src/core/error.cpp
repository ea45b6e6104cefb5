#include "robotask/error.hpp"

#include <array>
#include <utility>

namespace robotask {

namespace {

struct CodeName {
  ErrorCode code;
  std::string_view name;
};

constexpr std::array kCodeNames = {
    CodeName{ErrorCode::UnbalancedDelimiter, "UnbalancedDelimiter"},
    CodeName{ErrorCode::EmptyVariableName, "EmptyVariableName"},
    CodeName{ErrorCode::InvalidVariableName, "InvalidVariableName"},
    CodeName{ErrorCode::UnmatchedClause, "UnmatchedClause"},
    CodeName{ErrorCode::UncoveredVariable, "UncoveredVariable"},
    CodeName{ErrorCode::ConflictingVariableKind, "ConflictingVariableKind"},
    CodeName{ErrorCode::AdapterFailure, "AdapterFailure"},
    CodeName{ErrorCode::ValidationFailure, "ValidationFailure"},
    CodeName{ErrorCode::UnknownLocation, "UnknownLocation"},
    CodeName{ErrorCode::AmbiguousLocation, "AmbiguousLocation"},
    CodeName{ErrorCode::InvalidSequence, "InvalidSequence"},
    CodeName{ErrorCode::StorageFailure, "StorageFailure"},
    CodeName{ErrorCode::InvalidArgument, "InvalidArgument"},
    CodeName{ErrorCode::SchemaViolation, "SchemaViolation"},
    CodeName{ErrorCode::UnreachableFloor, "UnreachableFloor"},
    CodeName{ErrorCode::UnknownFloor, "UnknownFloor"},
    CodeName{ErrorCode::NoRoute, "NoRoute"},
    CodeName{ErrorCode::NothingToObserve, "NothingToObserve"},
    CodeName{ErrorCode::ContainerClosed, "ContainerClosed"},
    CodeName{ErrorCode::ItemNotPresent, "ItemNotPresent"},
    CodeName{ErrorCode::AlreadyHolding, "AlreadyHolding"},
    CodeName{ErrorCode::NotHolding, "NotHolding"},
    CodeName{ErrorCode::NoTemplateForFunction, "NoTemplateForFunction"},
    CodeName{ErrorCode::EmptyScene, "EmptyScene"},
    CodeName{ErrorCode::InvalidNoiseConfig, "InvalidNoiseConfig"},
    CodeName{ErrorCode::NothingToOffer, "NothingToOffer"},
    CodeName{ErrorCode::InvalidBinding, "InvalidBinding"},
    CodeName{ErrorCode::StaleQuestion, "StaleQuestion"},
    CodeName{ErrorCode::WrongPhase, "WrongPhase"},
    CodeName{ErrorCode::InvalidAnswer, "InvalidAnswer"},
    CodeName{ErrorCode::Cancelled, "Cancelled"},
    CodeName{ErrorCode::FeedbackTimeout, "FeedbackTimeout"},
    CodeName{ErrorCode::UnknownSession, "UnknownSession"},
    CodeName{ErrorCode::MalformedMessage, "MalformedMessage"},
};

std::string compose(ErrorCode code, const std::string& detail) {
  std::string out(to_string(code));
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  for (const auto& entry : kCodeNames) {
    if (entry.code == code) {
      return entry.name;
    }
  }
  return "Unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name) {
  for (const auto& entry : kCodeNames) {
    if (entry.name == name) {
      return entry.code;
    }
  }
  return std::nullopt;
}

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(std::move(detail)) {}

Error& Error::with_step(std::size_t index) {
  step_index_ = index;
  return *this;
}

Error& Error::with_candidates(std::vector<std::string> names) {
  candidates_ = std::move(names);
  return *this;
}

}  // namespace robotask
