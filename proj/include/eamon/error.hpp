#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eamon {

enum class Errc {
  InvalidArgument,
  EmptySignal,
  CutoffAboveNyquist,
  NonPositiveFullscale,
  WindowOverlap,
  SignalTooShort,
  EmptyTrain,
  DegenerateMasses,
  ZeroSlope,
  OverlappingGates,
  EmptyPads,
  OutOfOrderPulse,
  NonPositiveAmplitude,
  InvalidScenario,
  NotRiff,
  UnsupportedFormat,
  MultiChannel,
  TruncatedData,
  IoFailure,
  ParseError,
};

std::string_view errc_name(Errc code) noexcept;

/// True for errors caused by malformed or unreadable input files.
bool is_input_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace eamon
