#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace toposq {

enum class ErrorCode {
  NotHermitian,
  NotProjection,
  NotUnitVector,
  NotDensity,
  DimensionMismatch,
  NonCommuting,
  TrivialContext,
  InvalidContext,
  DuplicateId,
  UnknownContext,
  NotBelow,
  NotInContext,
  NotSubobject,
  PresheafMismatch,
  BadThreshold,
  NotPure,
  Underdetermined,
  InconsistentData,
  Capacity,
  ParseError,
  SchemaVersionError,
  ValidationError,
  IntegrityError,
  UnknownPreset,
  UnknownState,
  UnknownProposition,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotProjection: return "NotProjection";
    case ErrorCode::NotUnitVector: return "NotUnitVector";
    case ErrorCode::NotDensity: return "NotDensity";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonCommuting: return "NonCommuting";
    case ErrorCode::TrivialContext: return "TrivialContext";
    case ErrorCode::InvalidContext: return "InvalidContext";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownContext: return "UnknownContext";
    case ErrorCode::NotBelow: return "NotBelow";
    case ErrorCode::NotInContext: return "NotInContext";
    case ErrorCode::NotSubobject: return "NotSubobject";
    case ErrorCode::PresheafMismatch: return "PresheafMismatch";
    case ErrorCode::BadThreshold: return "BadThreshold";
    case ErrorCode::NotPure: return "NotPure";
    case ErrorCode::Underdetermined: return "Underdetermined";
    case ErrorCode::InconsistentData: return "InconsistentData";
    case ErrorCode::Capacity: return "CapacityError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaVersionError: return "SchemaVersionError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IntegrityError: return "IntegrityError";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::UnknownProposition: return "UnknownProposition";
  }
  return "Unknown";
}

/// Every failure raised by the library. `what()` is prefixed with the code name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by jointAtoms / generateContext; carries the offending generator pair.
class NonCommutingError : public Error {
 public:
  NonCommutingError(std::size_t first, std::size_t second)
      : Error(ErrorCode::NonCommuting, "generators " + std::to_string(first) + " and " +
                                           std::to_string(second) + " do not commute"),
        first_(first),
        second_(second) {}

  std::size_t first() const noexcept { return first_; }
  std::size_t second() const noexcept { return second_; }

 private:
  std::size_t first_;
  std::size_t second_;
};

/// Scenario validation failure at a JSON-pointer style field path.
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& reason)
      : Error(ErrorCode::ValidationError, path + ": " + reason), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace toposq
