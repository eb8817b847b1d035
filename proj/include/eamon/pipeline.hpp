#pragma once

#include <optional>

#include "eamon/pulse.hpp"
#include "eamon/signal.hpp"

namespace eamon {

struct AnalysisOptions {
  double frequency_hz = 5.0;
  double amplitude_v = 600.0;            ///< metadata carried into the train
  std::optional<double> phase_offset_s;  ///< nullopt: estimate from the recording
  std::optional<double> window_s;        ///< nullopt: default_window_s(frequency_hz)
  double cutoff_hz = 1000.0;
  double fullscale = 1.0;
  PeakStatistic statistic = PeakStatistic::Median;
};

struct AnalysisResult {
  PulseTrain train;
  double peak = 0.0;          ///< chosen statistic over the train
  double phase_offset_s = 0.0;
  double noise_floor = 0.0;   ///< 1.4826 * MAD of the filtered samples
  bool low_confidence = false;
};

/// Peaks weaker than this many noise-floor units are flagged as low confidence.
inline constexpr double kConfidenceRatio = 6.0;

/// Robust noise scale of a filtered recording (scaled median absolute deviation).
double noise_floor(std::span<const double> samples);

/// Filter, normalize, locate the drive phase and reduce to a pulse train and its statistic.
AnalysisResult analyze(const SampledSignal& recording, const AnalysisOptions& options);

/// The preprocessing half of analyze(): high-pass then full-scale normalization.
SampledSignal preprocess(const SampledSignal& recording, double cutoff_hz, double fullscale);

}  // namespace eamon
