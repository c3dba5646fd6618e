// lowra/error.hpp

// Copyright 2026  The lowra authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOWRA_ERROR_HPP
#define LOWRA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lowra {

enum class ErrorCode {
  // audio / corpus
  NotWav,
  UnsupportedFormat,
  Truncated,
  ParseError,
  DuplicateId,
  EmptyTranscript,
  IoError,
  EmptySplit,
  // features / shapes
  TooShort,
  ShapeMismatch,
  NonScalarLoss,
  SequenceTooShort,
  // ctc
  InfeasibleLength,
  BlankInTargets,
  TooLarge,
  AllUtterancesInfeasible,
  // eval
  LengthMismatch,
  EmptyReference,
  // config
  ConfigError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotWav: return "NotWav";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyTranscript: return "EmptyTranscript";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonScalarLoss: return "NonScalarLoss";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::InfeasibleLength: return "InfeasibleLength";
    case ErrorCode::BlankInTargets: return "BlankInTargets";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::AllUtterancesInfeasible: return "AllUtterancesInfeasible";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Process exit codes: 0 success, 1 validation/check failure, 2 I/O error.
inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::IoError:
    case ErrorCode::NotWav:
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::Truncated:
      return 2;
    default:
      return 1;
  }
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace lowra

#endif  // LOWRA_ERROR_HPP
