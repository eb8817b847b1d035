#pragma once

#include <cstddef>
#include <vector>

#include "eamon/signal.hpp"

namespace eamon {

/// Bipolar square-wave drive of one EA pad. Every polarity switch (twice per period)
/// excites one acoustic pulse, so pulses repeat every half period.
struct DriveConfig {
  double amplitude_v = 600.0;     ///< one-sided, 600 means +/-600 V
  double frequency_hz = 5.0;      ///< square-wave fundamental
  double phase_offset_s = 0.0;    ///< time of the first polarity switch after t = 0

  double half_period_s() const noexcept { return 0.5 / frequency_hz; }

  /// Offset reduced into [0, half period). Throws InvalidArgument for non-positive frequency.
  DriveConfig canonical() const;
};

struct Pulse {
  double time_s = 0.0;
  double peak = 0.0;

  friend bool operator==(const Pulse&, const Pulse&) = default;
};

struct PulseTrain {
  std::vector<Pulse> pulses;
  DriveConfig drive;
  double window_s = 0.0;
};

enum class PeakStatistic { Median, Mean, Max };

/// Default gate half-width: 30 ms at low drive rates, 1/(8f) above 4.17 Hz so gates never
/// overlap.
double default_window_s(double frequency_hz);

/// Switch times phase_offset + k / (2f), k >= 0, strictly before duration_s.
std::vector<double> expected_pulse_times(const DriveConfig& drive, double duration_s);

/// One pulse per expected switch time inside the signal: the largest |sample| within
/// +/- window_s of the slot (clipped to the signal) and the time of that sample.
/// Ties resolve to the earliest sample. Throws EmptySignal, WindowOverlap.
PulseTrain extract_pulse_train(const SampledSignal& signal, const DriveConfig& drive, double window_s);

/// Recovers the drive offset in [0, 1/(2f)) that maximizes the summed gate peaks.
///
/// Every candidate offset on the sample grid is scored over the same set of slots (those
/// that fit for every offset), so the score compares like with like. The maximum is flat
/// wherever the gates still cover each pulse peak; the winner is then re-centred on the
/// median argmax position of the pulses, provided that keeps the score maximal.
/// Throws SignalTooShort when fewer than two slots fit.
double estimate_drive_phase(const SampledSignal& signal, double frequency_hz, double window_s);

/// Score used by estimate_drive_phase for one offset; exposed for testing.
double phase_score(const SampledSignal& signal, double frequency_hz, double window_s, double offset_s);

/// The measurand: median of per-pulse peaks by default. Throws EmptyTrain.
double peak_statistic(const PulseTrain& train, PeakStatistic kind = PeakStatistic::Median);

double median(std::vector<double> values);

}  // namespace eamon
