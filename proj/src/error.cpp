#include "eamon/error.hpp"

namespace eamon {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::EmptySignal: return "EmptySignal";
    case Errc::CutoffAboveNyquist: return "CutoffAboveNyquist";
    case Errc::NonPositiveFullscale: return "NonPositiveFullscale";
    case Errc::WindowOverlap: return "WindowOverlap";
    case Errc::SignalTooShort: return "SignalTooShort";
    case Errc::EmptyTrain: return "EmptyTrain";
    case Errc::DegenerateMasses: return "DegenerateMasses";
    case Errc::ZeroSlope: return "ZeroSlope";
    case Errc::OverlappingGates: return "OverlappingGates";
    case Errc::EmptyPads: return "EmptyPads";
    case Errc::OutOfOrderPulse: return "OutOfOrderPulse";
    case Errc::NonPositiveAmplitude: return "NonPositiveAmplitude";
    case Errc::InvalidScenario: return "InvalidScenario";
    case Errc::NotRiff: return "NotRiff";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::MultiChannel: return "MultiChannel";
    case Errc::TruncatedData: return "TruncatedData";
    case Errc::IoFailure: return "IoFailure";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_input_error(Errc code) noexcept {
  switch (code) {
    case Errc::NotRiff:
    case Errc::UnsupportedFormat:
    case Errc::MultiChannel:
    case Errc::TruncatedData:
    case Errc::IoFailure:
    case Errc::ParseError:
      return true;
    default:
      return false;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

}  // namespace eamon
