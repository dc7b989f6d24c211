// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MWRF_ERROR_HPP
#define MWRF_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mwrf {

enum class ErrorCode {
  kOddDimension,
  kTooSmall,
  kShapeMismatch,
  kLevelTooDeep,
  kUnsupportedPadding,
  kOutOfDomain,
  kNonScalarLoss,
  kDivergedLoss,
  kEmptyInput,
  kInvalidArgument,
  kCorruptStream,
  kUnknownSymbol,
  kFormatVersionMismatch,
  kChecksumMismatch,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOddDimension: return "OddDimension";
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kLevelTooDeep: return "LevelTooDeep";
    case ErrorCode::kUnsupportedPadding: return "UnsupportedPadding";
    case ErrorCode::kOutOfDomain: return "OutOfDomain";
    case ErrorCode::kNonScalarLoss: return "NonScalarLoss";
    case ErrorCode::kDivergedLoss: return "DivergedLoss";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kCorruptStream: return "CorruptStream";
    case ErrorCode::kUnknownSymbol: return "UnknownSymbol";
    case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace mwrf

#endif  // MWRF_ERROR_HPP
