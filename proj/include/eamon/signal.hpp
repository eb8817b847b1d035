#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace eamon {

/// Uniformly sampled acoustic pressure. Sample i sits at start_time_s + i / sample_rate_hz.
class SampledSignal {
 public:
  SampledSignal(std::vector<double> samples, double sample_rate_hz, double start_time_s = 0.0);

  std::span<const double> samples() const noexcept { return samples_; }
  std::vector<double>& mutable_samples() noexcept { return samples_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  double start_time_s() const noexcept { return start_time_s_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double duration_s() const noexcept { return static_cast<double>(samples_.size()) / sample_rate_hz_; }
  double end_time_s() const noexcept { return start_time_s_ + duration_s(); }
  double time_at(std::size_t index) const noexcept {
    return start_time_s_ + static_cast<double>(index) / sample_rate_hz_;
  }

  /// Same metadata, new samples.
  SampledSignal with_samples(std::vector<double> samples) const;

 private:
  std::vector<double> samples_;
  double sample_rate_hz_;
  double start_time_s_;
};

struct FilterSpec {
  double cutoff_hz = 1000.0;
};

/// Brick-wall high-pass: zeroes every DFT bin with |frequency| < cutoff (DC included) and
/// keeps the rest, so the band [cutoff, Nyquist] passes untouched. Whole-signal transform.
/// Throws EmptySignal, CutoffAboveNyquist.
SampledSignal fft_highpass(const SampledSignal& signal, const FilterSpec& spec);

/// Divides every sample by the recording format's full-scale value (32768 for 16-bit PCM).
SampledSignal normalize_fullscale(const SampledSignal& signal, double fullscale);

double peak_abs(const SampledSignal& signal);
double peak_abs(std::span<const double> samples);

double rms(std::span<const double> samples);

}  // namespace eamon
