#include "eamon/demux.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "eamon/error.hpp"

namespace eamon {

namespace {

constexpr double kGateSlack = 1e-9;

double circular_gap(double a, double b, double period) {
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

double min_gap(std::span<const PadChannel> pads) {
  const double h = pads.front().drive.half_period_s();
  double gap = h;
  for (std::size_t i = 0; i < pads.size(); ++i) {
    for (std::size_t j = i + 1; j < pads.size(); ++j) {
      gap = std::min(gap, circular_gap(pads[i].drive.phase_offset_s, pads[j].drive.phase_offset_s, h));
    }
  }
  return gap;
}

}  // namespace

int max_pads(double frequency_hz, double window_s) {
  return static_cast<int>(std::floor(1.0 / (4.0 * frequency_hz * window_s) + kGateSlack));
}

void check_gates(std::span<const PadChannel> pads, double window_s) {
  if (pads.empty()) throw Error(Errc::EmptyPads, "demux needs at least one pad");
  const double f = pads.front().drive.frequency_hz;
  for (const PadChannel& pad : pads) {
    if (!(pad.drive.frequency_hz > 0.0)) throw Error(Errc::InvalidArgument, "drive frequency must be positive");
    if (pad.drive.frequency_hz != f) {
      throw Error(Errc::InvalidArgument, "all pads must share one drive frequency");
    }
  }
  if (!(window_s > 0.0)) throw Error(Errc::InvalidArgument, "window must be positive");
  const int limit = max_pads(f, window_s);
  if (static_cast<int>(pads.size()) > limit) {
    throw Error(Errc::OverlappingGates,
                fmt::format("{} pads do not fit: at most {} gates of +/-{} s per half period", pads.size(), limit,
                            window_s));
  }
  const double h = pads.front().drive.half_period_s();
  for (std::size_t i = 0; i < pads.size(); ++i) {
    for (std::size_t j = i + 1; j < pads.size(); ++j) {
      const double gap = circular_gap(pads[i].drive.phase_offset_s, pads[j].drive.phase_offset_s, h);
      if (gap < 2.0 * window_s - kGateSlack) {
        throw Error(Errc::OverlappingGates,
                    fmt::format("pads {} and {} are {} s apart; gates of +/-{} s need {} s", pads[i].pad_id,
                                pads[j].pad_id, gap, window_s, 2.0 * window_s));
      }
    }
  }
}

std::vector<PulseTrain> demux_pulse_trains(const SampledSignal& signal, std::span<const PadChannel> pads,
                                           double window_s) {
  check_gates(pads, window_s);
  std::vector<PadChannel> ordered(pads.begin(), pads.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const PadChannel& a, const PadChannel& b) { return a.pad_id < b.pad_id; });
  std::vector<PulseTrain> trains;
  trains.reserve(ordered.size());
  for (const PadChannel& pad : ordered) trains.push_back(extract_pulse_train(signal, pad.drive, window_s));
  return trains;
}

double demux_window_s(std::span<const PadChannel> pads) {
  if (pads.empty()) throw Error(Errc::EmptyPads, "demux needs at least one pad");
  const double window = default_window_s(pads.front().drive.frequency_hz);
  const double gap = pads.size() > 1 ? min_gap(pads) : 0.0;
  return gap > 0.0 ? std::min(window, 0.5 * gap) : window;
}

}  // namespace eamon
