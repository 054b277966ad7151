#include "kilnloop/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "kilnloop/error.hpp"

namespace kilnloop {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw Error(ErrorCode::InvalidConfig, "uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return lo + static_cast<std::int64_t>(draw % span);
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpace: return "InvalidSpace";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::UnknownLevel: return "UnknownLevel";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::InvalidPoint: return "InvalidPoint";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidHyperparams: return "InvalidHyperparams";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::InfeasibleSpace: return "InfeasibleSpace";
    case ErrorCode::OpenIterationExists: return "OpenIterationExists";
    case ErrorCode::NoOpenIteration: return "NoOpenIteration";
    case ErrorCode::UnknownProposal: return "UnknownProposal";
    case ErrorCode::DuplicateResult: return "DuplicateResult";
    case ErrorCode::MissingResult: return "MissingResult";
    case ErrorCode::NoClosedIterations: return "NoClosedIterations";
    case ErrorCode::StateLocked: return "StateLocked";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace kilnloop
