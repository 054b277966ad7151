#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kilnloop {

enum class ErrorCode {
  InvalidSpace,
  UnknownParameter,
  UnknownLevel,
  GridTooLarge,
  InvalidPoint,
  SchemaMismatch,
  ParseError,
  EmptyDataset,
  InsufficientData,
  LengthMismatch,
  EmptyInput,
  InvalidHyperparams,
  SpaceMismatch,
  InfeasibleSpace,
  OpenIterationExists,
  NoOpenIteration,
  UnknownProposal,
  DuplicateResult,
  MissingResult,
  NoClosedIterations,
  StateLocked,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library is reported through this type.
/// Callers that need to branch on the failure kind inspect code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kilnloop
