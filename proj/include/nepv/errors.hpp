// Copyright (c) nepv contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace nepv {

enum class ErrorCode {
  InvalidParams,
  NotHermitian,
  BackendFailure,
  RankDeficient,
  DimensionMismatch,
  SingularOverlap,
  AngleAtPiOverTwo,
  ShiftOutOfRange,
  GapCollapse,
  NotASolution,
  GapViolation,
  InsufficientHistory,
  TooLarge,
  NotSelfAdjoint,
  InvalidSpectrum,
  NoRootInRange,
  CertificationFailed,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nepv
