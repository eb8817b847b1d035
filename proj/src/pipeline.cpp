#include "eamon/pipeline.hpp"

#include <cmath>

namespace eamon {

double noise_floor(std::span<const double> samples) {
  std::vector<double> values(samples.begin(), samples.end());
  const double centre = median(values);
  for (double& v : values) v = std::abs(v - centre);
  return 1.4826 * median(std::move(values));
}

SampledSignal preprocess(const SampledSignal& recording, double cutoff_hz, double fullscale) {
  return normalize_fullscale(fft_highpass(recording, FilterSpec{cutoff_hz}), fullscale);
}

AnalysisResult analyze(const SampledSignal& recording, const AnalysisOptions& options) {
  const SampledSignal clean = preprocess(recording, options.cutoff_hz, options.fullscale);
  const double window = options.window_s.value_or(default_window_s(options.frequency_hz));

  AnalysisResult result;
  result.phase_offset_s = options.phase_offset_s.has_value()
                              ? *options.phase_offset_s
                              : estimate_drive_phase(clean, options.frequency_hz, window);
  result.train = extract_pulse_train(clean, DriveConfig{options.amplitude_v, options.frequency_hz, result.phase_offset_s}, window);
  result.peak = peak_statistic(result.train, options.statistic);
  result.noise_floor = noise_floor(clean.samples());
  result.low_confidence = !(result.peak > kConfidenceRatio * result.noise_floor);
  return result;
}

}  // namespace eamon
