// Copyright 2026 The hmor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hmor {

enum class ErrorKind {
  InvalidIndex,
  InvalidArgument,
  ShapeError,
  SingularOperator,
  SingularReducedOperator,
  EmptyNeumannBoundary,
  NotClassified,
  DuplicateProbe,
  BasisFull,
  PlanExhausted,
  DegenerateDenominator,
  InsufficientData,
  EmptyResult,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this type; kind() drives the CLI
// exit-code mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidIndex: return "InvalidIndex";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::SingularOperator: return "SingularOperator";
    case ErrorKind::SingularReducedOperator: return "SingularReducedOperator";
    case ErrorKind::EmptyNeumannBoundary: return "EmptyNeumannBoundary";
    case ErrorKind::NotClassified: return "NotClassified";
    case ErrorKind::DuplicateProbe: return "DuplicateProbe";
    case ErrorKind::BasisFull: return "BasisFull";
    case ErrorKind::PlanExhausted: return "PlanExhausted";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::EmptyResult: return "EmptyResult";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace hmor
