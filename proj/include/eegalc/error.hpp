#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eegalc {

enum class ErrorCode {
  MalformedHeader,
  UnknownElectrode,
  MalformedRow,
  SampleCountMismatch,
  NonFiniteValue,
  UnsupportedRate,
  SchemaMismatch,
  IncompleteTrial,
  LabelConflict,
  IndexOutOfRange,
  EmptyClass,
  NonPositiveScale,
  EmptyGrid,
  EmptyInput,
  LengthNotPowerOfTwo,
  DegenerateInput,
  InvalidK,
  KTooLarge,
  InvalidArgument,
  SingleClassTrain,
  InvalidHyperparam,
  DimensionMismatch,
  InputTooSmall,
  ShapeMismatch,
  EmptySet,
  InvalidEpsilon,
  IoError,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnknownElectrode: return "UnknownElectrode";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::SampleCountMismatch: return "SampleCountMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::UnsupportedRate: return "UnsupportedRate";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::IncompleteTrial: return "IncompleteTrial";
    case ErrorCode::LabelConflict: return "LabelConflict";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::LengthNotPowerOfTwo: return "LengthNotPowerOfTwo";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingleClassTrain: return "SingleClassTrain";
    case ErrorCode::InvalidHyperparam: return "InvalidHyperparam";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InputTooSmall: return "InputTooSmall";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace eegalc
