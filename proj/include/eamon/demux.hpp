#pragma once

#include <span>
#include <vector>

#include "eamon/pulse.hpp"

namespace eamon {

/// One EA pad sharing the microphone. Pads share a drive frequency and are told apart by
/// their switch times (a 90 degree shift of the drive is a quarter period).
struct PadChannel {
  int pad_id = 0;
  DriveConfig drive;
};

/// Largest pad count whose gates fit in one half period: floor(1 / (4 f w)).
int max_pads(double frequency_hz, double window_s);

/// Throws EmptyPads, InvalidArgument (mixed frequencies) or OverlappingGates when two pads'
/// offsets are closer than 2 * window_s modulo the half period.
void check_gates(std::span<const PadChannel> pads, double window_s);

/// Time-division demultiplexing: one pulse train per pad, in pad_id order.
std::vector<PulseTrain> demux_pulse_trains(const SampledSignal& signal, std::span<const PadChannel> pads,
                                           double window_s);

/// Gate window for demux when the caller does not choose one: the default window, shrunk
/// so that the closest pair of offsets still has disjoint gates.
double demux_window_s(std::span<const PadChannel> pads);

}  // namespace eamon
