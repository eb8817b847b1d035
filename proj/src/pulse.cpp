#include "eamon/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "eamon/error.hpp"

namespace eamon {

namespace {

// Slack for converting slot times to sample indices; keeps k / (2f) * fs from landing one
// sample off when the product is an integer in exact arithmetic.
constexpr double kIndexSlack = 1e-7;

struct IndexRange {
  std::size_t lo = 0;
  std::size_t hi = 0;  // inclusive
};

// Samples whose time lies in [centre - half_width, centre + half_width], clipped.
std::optional<IndexRange> window_indices(const SampledSignal& signal, double centre_s, double half_width_s) {
  const double fs = signal.sample_rate_hz();
  const double rel = centre_s - signal.start_time_s();
  const double lo = std::ceil((rel - half_width_s) * fs - kIndexSlack);
  const double hi = std::floor((rel + half_width_s) * fs + kIndexSlack);
  const double last = static_cast<double>(signal.size()) - 1.0;
  if (hi < 0.0 || lo > last) return std::nullopt;
  return IndexRange{static_cast<std::size_t>(std::max(lo, 0.0)), static_cast<std::size_t>(std::min(hi, last))};
}

// Slot times phase + k*H inside [start, end).
std::vector<double> slot_times_in(const DriveConfig& drive, double start_s, double end_s) {
  std::vector<double> times;
  const double twice_f = 2.0 * drive.frequency_hz;
  auto k = static_cast<long long>(std::max(0.0, std::floor((start_s - drive.phase_offset_s) * twice_f)));
  for (;; ++k) {
    const double t = drive.phase_offset_s + static_cast<double>(k) / twice_f;
    if (t >= end_s) break;
    if (t >= start_s) times.push_back(t);
  }
  return times;
}

void check_window(double frequency_hz, double window_s) {
  if (!(window_s > 0.0)) throw Error(Errc::InvalidArgument, "window must be positive");
  if (!(window_s < 0.25 / frequency_hz)) {
    throw Error(Errc::WindowOverlap, "window " + std::to_string(window_s) + " s overlaps neighbouring slots at " +
                                         std::to_string(frequency_hz) + " Hz (needs < 1/(4f))");
  }
}

// Sparse table for O(1) range-max queries over |x|.
class RangeMax {
 public:
  explicit RangeMax(std::span<const double> samples) {
    const std::size_t n = samples.size();
    levels_.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) levels_[0][i] = std::abs(samples[i]);
    for (std::size_t width = 2; width <= n; width *= 2) {
      const auto& prev = levels_.back();
      std::vector<double> next(n - width + 1);
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::max(prev[i], prev[i + width / 2]);
      levels_.push_back(std::move(next));
    }
  }

  double query(std::size_t lo, std::size_t hi) const {
    const std::size_t len = hi - lo + 1;
    std::size_t level = 0;
    while ((std::size_t{2} << level) <= len) ++level;
    const std::size_t width = std::size_t{1} << level;
    return std::max(levels_[level][lo], levels_[level][hi + 1 - width]);
  }

 private:
  std::vector<std::vector<double>> levels_;
};

struct PhaseGrid {
  double half_period = 0.0;
  std::size_t candidates = 0;  // offsets j / fs for j < candidates
  long long first_slot = 0;
  long long slot_count = 0;
};

PhaseGrid make_phase_grid(const SampledSignal& signal, double frequency_hz) {
  PhaseGrid grid;
  grid.half_period = 0.5 / frequency_hz;
  const double fs = signal.sample_rate_hz();
  grid.candidates = static_cast<std::size_t>(std::ceil(grid.half_period * fs - kIndexSlack));
  grid.candidates = std::max<std::size_t>(grid.candidates, 1);
  const double max_offset = static_cast<double>(grid.candidates - 1) / fs;
  const double twice_f = 2.0 * frequency_hz;
  // Slots that exist for every candidate offset: o + kH >= start for o = 0 and < end for the
  // largest o.
  grid.first_slot = static_cast<long long>(std::ceil(signal.start_time_s() * twice_f - kIndexSlack));
  long long k = grid.first_slot;
  while (max_offset + static_cast<double>(k) / twice_f < signal.end_time_s()) ++k;
  grid.slot_count = k - grid.first_slot;
  return grid;
}

double score_with(const SampledSignal& signal, const RangeMax& table, const PhaseGrid& grid, double frequency_hz,
                  double window_s, double offset_s) {
  const double twice_f = 2.0 * frequency_hz;
  double score = 0.0;
  for (long long k = grid.first_slot; k < grid.first_slot + grid.slot_count; ++k) {
    const double t = offset_s + static_cast<double>(k) / twice_f;
    if (auto range = window_indices(signal, t, window_s)) score += table.query(range->lo, range->hi);
  }
  return score;
}

}  // namespace

DriveConfig DriveConfig::canonical() const {
  if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) {
    throw Error(Errc::InvalidArgument, "drive frequency must be positive");
  }
  if (!(phase_offset_s >= 0.0) && !(phase_offset_s < 0.0)) {
    throw Error(Errc::InvalidArgument, "drive phase offset is NaN");
  }
  DriveConfig out = *this;
  const double h = half_period_s();
  double off = std::fmod(phase_offset_s, h);
  if (off < 0.0) off += h;
  if (off >= h) off = 0.0;
  out.phase_offset_s = off;
  return out;
}

double default_window_s(double frequency_hz) {
  if (!(frequency_hz > 0.0)) throw Error(Errc::InvalidArgument, "drive frequency must be positive");
  return std::min(0.03, 1.0 / (8.0 * frequency_hz));
}

std::vector<double> expected_pulse_times(const DriveConfig& drive, double duration_s) {
  if (!(duration_s > 0.0)) throw Error(Errc::InvalidArgument, "duration must be positive");
  return slot_times_in(drive.canonical(), 0.0, duration_s);
}

PulseTrain extract_pulse_train(const SampledSignal& signal, const DriveConfig& drive, double window_s) {
  if (signal.empty()) throw Error(Errc::EmptySignal, "cannot extract pulses from an empty signal");
  const DriveConfig canon = drive.canonical();
  check_window(canon.frequency_hz, window_s);

  PulseTrain train;
  train.drive = canon;
  train.window_s = window_s;
  const auto samples = signal.samples();
  for (double t : slot_times_in(canon, signal.start_time_s(), signal.end_time_s())) {
    const auto range = window_indices(signal, t, window_s);
    if (!range) continue;
    std::size_t best = range->lo;
    double peak = std::abs(samples[best]);
    for (std::size_t i = range->lo + 1; i <= range->hi; ++i) {
      const double v = std::abs(samples[i]);
      if (v > peak) {
        peak = v;
        best = i;
      }
    }
    train.pulses.push_back({signal.time_at(best), peak});
  }
  return train;
}

double phase_score(const SampledSignal& signal, double frequency_hz, double window_s, double offset_s) {
  if (signal.empty()) throw Error(Errc::EmptySignal, "cannot score an empty signal");
  check_window(frequency_hz, window_s);
  const RangeMax table(signal.samples());
  return score_with(signal, table, make_phase_grid(signal, frequency_hz), frequency_hz, window_s, offset_s);
}

double estimate_drive_phase(const SampledSignal& signal, double frequency_hz, double window_s) {
  if (signal.empty()) throw Error(Errc::EmptySignal, "cannot estimate phase of an empty signal");
  if (!(frequency_hz > 0.0)) throw Error(Errc::InvalidArgument, "drive frequency must be positive");
  check_window(frequency_hz, window_s);
  const PhaseGrid grid = make_phase_grid(signal, frequency_hz);
  if (grid.slot_count < 2) {
    throw Error(Errc::SignalTooShort, "need at least two pulse slots to estimate the drive phase");
  }

  const double fs = signal.sample_rate_hz();
  const RangeMax table(signal.samples());
  std::size_t best_j = 0;
  double best_score = -1.0;
  for (std::size_t j = 0; j < grid.candidates; ++j) {
    const double score = score_with(signal, table, grid, frequency_hz, window_s, static_cast<double>(j) / fs);
    if (score > best_score) {
      best_score = score;
      best_j = j;
    }
  }
  const double coarse = static_cast<double>(best_j) / fs;

  // Re-centre on the pulse onsets: in each gate, the first sample reaching half the gate
  // maximum. Filter ripple can push a later carrier cycle above the onset sample, so the
  // argmax alone is not a stable landmark.
  const auto samples = signal.samples();
  const DriveConfig coarse_drive{1.0, frequency_hz, coarse};
  std::vector<double> lags;
  for (double t : slot_times_in(coarse_drive, signal.start_time_s(), signal.end_time_s())) {
    const auto range = window_indices(signal, t, window_s);
    if (!range) continue;
    const double peak = table.query(range->lo, range->hi);
    if (!(peak > 0.0)) continue;
    std::size_t i = range->lo;
    while (std::abs(samples[i]) < 0.5 * peak) ++i;
    lags.push_back(signal.time_at(i) - t);
  }
  const double h = grid.half_period;
  if (lags.empty()) return coarse;
  double refined = std::round((coarse + median(lags)) * fs) / fs;
  refined = std::fmod(refined, h);
  if (refined < 0.0) refined += h;
  if (std::round(refined * fs) >= static_cast<double>(grid.candidates)) refined = 0.0;

  const double refined_score = score_with(signal, table, grid, frequency_hz, window_s, refined);
  const double tolerance = 1e-12 * std::max(1.0, std::abs(best_score));
  return refined_score >= best_score - tolerance ? refined : coarse;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(Errc::EmptyTrain, "median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double peak_statistic(const PulseTrain& train, PeakStatistic kind) {
  if (train.pulses.empty()) throw Error(Errc::EmptyTrain, "pulse train has no pulses");
  std::vector<double> peaks;
  peaks.reserve(train.pulses.size());
  for (const Pulse& p : train.pulses) peaks.push_back(p.peak);
  switch (kind) {
    case PeakStatistic::Median:
      return median(std::move(peaks));
    case PeakStatistic::Mean:
      return std::accumulate(peaks.begin(), peaks.end(), 0.0) / static_cast<double>(peaks.size());
    case PeakStatistic::Max:
      return *std::max_element(peaks.begin(), peaks.end());
  }
  return 0.0;
}

}  // namespace eamon
