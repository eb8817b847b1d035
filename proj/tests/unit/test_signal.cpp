#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "eamon/error.hpp"
#include "eamon/signal.hpp"
#include "support.hpp"

using namespace eamon;
using namespace eamon::testing;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an eamon::Error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("SampledSignal derives duration and rejects bad rates") {
  const SampledSignal s({1.0, 2.0, 3.0, 4.0}, 8.0, 0.25);
  CHECK(s.duration_s() == doctest::Approx(0.5));
  CHECK(s.end_time_s() == doctest::Approx(0.75));
  CHECK(s.time_at(2) == doctest::Approx(0.5));
  CHECK(code_of([] { SampledSignal({1.0}, 0.0); }) == Errc::InvalidArgument);
  CHECK(code_of([] { SampledSignal({1.0}, -44100.0); }) == Errc::InvalidArgument);
}

TEST_CASE("high-pass zeroes a constant signal") {
  const SampledSignal s(std::vector<double>(1000, 0.5), 44100.0);
  const auto out = fft_highpass(s, {});
  for (double v : out.samples()) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("high-pass keeps a bin-aligned 2 kHz tone") {
  // 441 samples at 44.1 kHz: bin spacing 100 Hz.
  const auto x = sine(441, 44100.0, 2000.0, 0.8);
  const auto out = fft_highpass(SampledSignal(x, 44100.0), {1000.0});
  CHECK(rms_diff(out.samples(), x) < 1e-9);
  CHECK(rms_diff(out.samples(), oracle_highpass(x, 44100.0, 1000.0)) < 1e-9);
}

TEST_CASE("high-pass separates 100 Hz from 2 kHz") {
  auto x = sine(441, 44100.0, 100.0, 0.5);
  const auto high = sine(441, 44100.0, 2000.0, 0.3);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += high[i];
  const auto out = fft_highpass(SampledSignal(x, 44100.0), {1000.0});
  CHECK(rms_diff(out.samples(), high) < 1e-9);
}

TEST_CASE("high-pass matches the direct DFT oracle on random signals") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 64 + rng() % 300;  // odd and even lengths
    const double fs = uniform(rng, 4000.0, 48000.0);
    const double cutoff = uniform(rng, 10.0, 0.45 * fs);
    const auto x = gaussian_noise(rng, n, 1.0);
    const auto out = fft_highpass(SampledSignal(x, fs), {cutoff});
    CHECK(rms_diff(out.samples(), oracle_highpass(x, fs, cutoff)) < 1e-9);
  }
}

TEST_CASE("a bin exactly at the cutoff is kept") {
  const auto x = sine(441, 44100.0, 1000.0, 0.4);
  const auto out = fft_highpass(SampledSignal(x, 44100.0), {1000.0});
  CHECK(rms_diff(out.samples(), x) < 1e-9);
}

TEST_CASE("filtered output has no sub-cutoff energy") {
  std::mt19937_64 rng(5);
  const auto x = gaussian_noise(rng, 500, 0.3);
  const double fs = 8000.0;
  const auto out = fft_highpass(SampledSignal(x, fs), {1200.0});
  const std::vector<double> y(out.samples().begin(), out.samples().end());
  const auto spectrum = direct_dft(y);
  for (std::size_t k = 0; k < y.size(); ++k) {
    const std::size_t j = std::min(k, y.size() - k);
    if (static_cast<double>(j) * fs / static_cast<double>(y.size()) < 1200.0) CHECK(std::abs(spectrum[k]) < 1e-9);
  }
}

TEST_CASE("high-pass errors") {
  CHECK(code_of([] { fft_highpass(SampledSignal({}, 44100.0), {}); }) == Errc::EmptySignal);
  CHECK(code_of([] { fft_highpass(SampledSignal({1.0, 2.0}, 2000.0), {1000.0}); }) == Errc::CutoffAboveNyquist);
  CHECK(code_of([] { fft_highpass(SampledSignal({1.0, 2.0}, 2000.0), {0.0}); }) == Errc::InvalidArgument);
}

TEST_CASE("property: idempotence, linearity, length and rate preservation") {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 32 + rng() % 2000;
    const double fs = uniform(rng, 2000.0, 96000.0);
    const FilterSpec spec{uniform(rng, 1.0, 0.49 * fs)};
    const auto x = gaussian_noise(rng, n, uniform(rng, 0.01, 2.0));
    const auto y = gaussian_noise(rng, n, uniform(rng, 0.01, 2.0));
    const double alpha = uniform(rng, -3.0, 3.0);
    const double beta = uniform(rng, -3.0, 3.0);

    const SampledSignal sx(x, fs, 0.125);
    const auto fx = fft_highpass(sx, spec);
    REQUIRE(fx.size() == n);
    CHECK(fx.sample_rate_hz() == fs);
    CHECK(fx.start_time_s() == 0.125);
    CHECK(rms_diff(fft_highpass(fx, spec).samples(), fx.samples()) < 1e-9);

    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = alpha * x[i] + beta * y[i];
    const auto fmix = fft_highpass(SampledSignal(mix, fs), spec);
    const auto fy = fft_highpass(SampledSignal(y, fs), spec);
    std::vector<double> combined(n);
    for (std::size_t i = 0; i < n; ++i) combined[i] = alpha * fx.samples()[i] + beta * fy.samples()[i];
    CHECK(rms_diff(fmix.samples(), combined) < 1e-9);
  }
}

TEST_CASE("normalize_fullscale examples") {
  CHECK(std::ranges::equal(normalize_fullscale(SampledSignal({0.5, -1.0}, 8000.0), 1.0).samples(),
                           std::vector<double>{0.5, -1.0}));
  CHECK(std::ranges::equal(normalize_fullscale(SampledSignal({16384.0, -32768.0}, 8000.0), 32768.0).samples(),
                           std::vector<double>{0.5, -1.0}));
  CHECK(normalize_fullscale(SampledSignal({0.2}, 8000.0), 0.5).samples()[0] == doctest::Approx(0.4));
  CHECK(code_of([] { normalize_fullscale(SampledSignal({0.2}, 8000.0), 0.0); }) == Errc::NonPositiveFullscale);
  CHECK(code_of([] { normalize_fullscale(SampledSignal({0.2}, 8000.0), -2.0); }) == Errc::NonPositiveFullscale);
}

TEST_CASE("property: normalize composes multiplicatively") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = gaussian_noise(rng, 64, 1000.0);
    const SampledSignal s(x, 44100.0);
    // Powers of two keep every division exact.
    const double a = std::ldexp(1.0, static_cast<int>(rng() % 20) - 10);
    const double b = std::ldexp(1.0, static_cast<int>(rng() % 20) - 10);
    CHECK(std::ranges::equal(normalize_fullscale(s, a * b).samples(),
                             normalize_fullscale(normalize_fullscale(s, a), b).samples()));
    // Arbitrary factors agree to rounding.
    const double c = uniform(rng, 0.1, 10.0);
    const double d = uniform(rng, 0.1, 10.0);
    const auto lhs = normalize_fullscale(s, c * d);
    const auto rhs = normalize_fullscale(normalize_fullscale(s, c), d);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(lhs.samples()[i] - rhs.samples()[i]) <= 4e-16 * std::abs(lhs.samples()[i]));
    }
  }
}

TEST_CASE("peak_abs") {
  CHECK(peak_abs(SampledSignal({0.1, -0.7, 0.3}, 1.0)) == 0.7);
  CHECK(peak_abs(SampledSignal({0.0, 0.0, 0.0}, 1.0)) == 0.0);
  CHECK(code_of([] { peak_abs(SampledSignal({}, 1.0)); }) == Errc::EmptySignal);
}

TEST_CASE("peak_abs of a sampled damped sinusoid against a dense-grid evaluation") {
  const double amp = 0.068;
  const double tau = 0.005;
  const double carrier = 3000.0;
  const auto f = [&](double t) { return amp * std::exp(-t / tau) * std::sin(2.0 * std::numbers::pi * carrier * t); };

  double dense_max = 0.0;
  for (int i = 0; i <= 200000; ++i) dense_max = std::max(dense_max, std::abs(f(i * 0.02 / 200000.0)));

  std::vector<double> x(882);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = f(static_cast<double>(i) / 44100.0);
  const double sampled = peak_abs(SampledSignal(x, 44100.0));
  CHECK(sampled > 0.9 * amp);
  CHECK(sampled <= amp);
  CHECK(sampled <= dense_max + 1e-15);
  CHECK(sampled > 0.97 * dense_max);
}

TEST_CASE("rms") {
  const std::vector<double> x{3.0, -3.0, 3.0, -3.0};
  CHECK(rms(x) == doctest::Approx(3.0));
}
