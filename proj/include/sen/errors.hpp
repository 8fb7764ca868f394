#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sen {

enum class Errc {
  ZeroScale,
  DimensionMismatch,
  SizeMismatch,
  OutOfRange,
  IndexOutOfRange,
  ConvergenceFailure,
  NonPositiveDegree,
  TooLarge,
  NearCrossing,
  NotBlockDiagonal,
  GapTooSmall,
  BadFraction,
  PatchTooLarge,
  Empty,
  Parse,
  Io,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::ZeroScale: return "ZeroScale";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::ConvergenceFailure: return "ConvergenceFailure";
    case Errc::NonPositiveDegree: return "NonPositiveDegree";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NearCrossing: return "NearCrossing";
    case Errc::NotBlockDiagonal: return "NotBlockDiagonal";
    case Errc::GapTooSmall: return "GapTooSmall";
    case Errc::BadFraction: return "BadFraction";
    case Errc::PatchTooLarge: return "PatchTooLarge";
    case Errc::Empty: return "Empty";
    case Errc::Parse: return "Parse";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

// Numeric failures arise from the data or the solver rather than from bad
// arguments; the CLI maps them to a distinct exit code.
constexpr bool is_numeric_failure(Errc code) {
  switch (code) {
    case Errc::ConvergenceFailure:
    case Errc::NonPositiveDegree:
    case Errc::NearCrossing:
    case Errc::NotBlockDiagonal:
    case Errc::GapTooSmall:
    case Errc::ZeroScale:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sen
