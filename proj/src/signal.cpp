#include "eamon/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <string>

#include "eamon/error.hpp"

namespace eamon {

namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* plan) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace

SampledSignal::SampledSignal(std::vector<double> samples, double sample_rate_hz, double start_time_s)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz), start_time_s_(start_time_s) {
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
    throw Error(Errc::InvalidArgument, "sample rate must be positive, got " + std::to_string(sample_rate_hz));
  }
}

SampledSignal SampledSignal::with_samples(std::vector<double> samples) const {
  return SampledSignal(std::move(samples), sample_rate_hz_, start_time_s_);
}

SampledSignal fft_highpass(const SampledSignal& signal, const FilterSpec& spec) {
  if (signal.empty()) throw Error(Errc::EmptySignal, "cannot filter an empty signal");
  const double fs = signal.sample_rate_hz();
  if (!(spec.cutoff_hz > 0.0)) {
    throw Error(Errc::InvalidArgument, "cutoff must be positive");
  }
  if (!(spec.cutoff_hz < fs / 2.0)) {
    throw Error(Errc::CutoffAboveNyquist,
                "cutoff " + std::to_string(spec.cutoff_hz) + " Hz is not below Nyquist " + std::to_string(fs / 2.0) +
                    " Hz");
  }

  const std::size_t n = signal.size();
  const std::size_t bins = n / 2 + 1;
  std::vector<double> buffer(signal.samples().begin(), signal.samples().end());
  std::vector<std::complex<double>> spectrum(bins);
  auto* freq = reinterpret_cast<fftw_complex*>(spectrum.data());

  Plan forward, inverse;
  {
    std::lock_guard lock(planner_mutex());
    const int len = static_cast<int>(n);
    forward.reset(fftw_plan_dft_r2c_1d(len, buffer.data(), freq, FFTW_ESTIMATE));
    inverse.reset(fftw_plan_dft_c2r_1d(len, freq, buffer.data(), FFTW_ESTIMATE));
  }
  // Planning with FFTW_ESTIMATE leaves the input intact.
  fftw_execute(forward.get());

  // Bin j sits at j * fs / n; compare without dividing so an exact-cutoff bin is kept.
  const double limit = spec.cutoff_hz * static_cast<double>(n);
  for (std::size_t j = 0; j < bins; ++j) {
    if (static_cast<double>(j) * fs < limit) spectrum[j] = 0.0;
  }

  fftw_execute(inverse.get());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : buffer) v *= scale;
  return signal.with_samples(std::move(buffer));
}

SampledSignal normalize_fullscale(const SampledSignal& signal, double fullscale) {
  if (!(fullscale > 0.0)) {
    throw Error(Errc::NonPositiveFullscale, "full-scale value must be positive, got " + std::to_string(fullscale));
  }
  std::vector<double> out(signal.samples().begin(), signal.samples().end());
  for (double& v : out) v /= fullscale;
  return signal.with_samples(std::move(out));
}

double peak_abs(std::span<const double> samples) {
  if (samples.empty()) throw Error(Errc::EmptySignal, "peak of an empty signal");
  double peak = 0.0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  return peak;
}

double peak_abs(const SampledSignal& signal) { return peak_abs(signal.samples()); }

double rms(std::span<const double> samples) {
  if (samples.empty()) throw Error(Errc::EmptySignal, "rms of an empty signal");
  double acc = 0.0;
  for (double v : samples) acc += v * v;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

}  // namespace eamon
