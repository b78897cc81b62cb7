#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ffnspec {

enum class ErrorCode {
  // spectra
  NotSymmetric,
  NotPSD,
  NegativeEigenvalue,
  DegenerateSpectrum,
  WidthTooSmall,
  // covariance
  ShapeMismatch,
  NonFiniteInput,
  InsufficientTokens,
  // synthetic
  BadFraction,
  BadParameter,
  // fitting
  TooFewPoints,
  TooFewWidths,
  NonPositiveValue,
  DuplicateWidth,
  EmptyWidthGroup,
  MixedObservations,
  // dump files
  Io,
  BadMagic,
  UnsupportedVersion,
  BadHeader,
  TruncatedPayload,
  TrailingBytes,
  NonFiniteValue,
  MixedWidthInGroup,
  // reports
  EmptyRecordSet,
  DuplicateCell,
  BadReport,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::WidthTooSmall: return "WidthTooSmall";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InsufficientTokens: return "InsufficientTokens";
    case ErrorCode::BadFraction: return "BadFraction";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::TooFewWidths: return "TooFewWidths";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::DuplicateWidth: return "DuplicateWidth";
    case ErrorCode::EmptyWidthGroup: return "EmptyWidthGroup";
    case ErrorCode::MixedObservations: return "MixedObservations";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::TrailingBytes: return "TrailingBytes";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::MixedWidthInGroup: return "MixedWidthInGroup";
    case ErrorCode::EmptyRecordSet: return "EmptyRecordSet";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::BadReport: return "BadReport";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace ffnspec
