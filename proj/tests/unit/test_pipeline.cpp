#include <doctest.h>

#include <cmath>
#include <random>

#include "eamon/error.hpp"
#include "eamon/pipeline.hpp"
#include "eamon/simulator.hpp"
#include "support.hpp"

using namespace eamon;
using namespace eamon::testing;

TEST_CASE("noise floor of Gaussian noise approximates sigma") {
  std::mt19937_64 rng(1);
  const auto x = gaussian_noise(rng, 200000, 0.02);
  CHECK(noise_floor(x) == doctest::Approx(0.02).epsilon(0.02));
}

TEST_CASE("analyze the reference recording with estimated phase") {
  for (double m : {10.0, 15.0, 20.0, 25.0, 30.0}) {
    auto sc = reference_scenario(m, 2.0);
    const auto r = analyze(synthesize(sc).signal, {});
    CHECK(r.train.pulses.size() == 20);
    CHECK(r.peak == doctest::Approx(0.0016 * m + 0.044).epsilon(0.005));
    CHECK(std::abs(r.phase_offset_s) <= 1.0 / 44100.0);
    CHECK_FALSE(r.low_confidence);
  }
}

TEST_CASE("analyze honours an explicit phase and full scale") {
  auto sc = reference_scenario(15.0, 1.0);
  sc.drive.phase_offset_s = 0.03;
  const auto rec = synthesize(sc).signal;
  AnalysisOptions o;
  o.phase_offset_s = 0.03;
  const auto r = analyze(rec, o);
  CHECK(r.phase_offset_s == 0.03);
  CHECK(r.train.pulses.size() == 10);
  CHECK(r.peak == doctest::Approx(0.068).epsilon(0.005));

  std::vector<double> raw(rec.samples().begin(), rec.samples().end());
  for (double& v : raw) v *= 32768.0;
  o.fullscale = 32768.0;
  CHECK(analyze(SampledSignal(raw, rec.sample_rate_hz()), o).peak == doctest::Approx(r.peak).epsilon(1e-12));
}

TEST_CASE("analyze flags noise-only recordings as low confidence") {
  auto sc = reference_scenario(15.0, 2.0);
  sc.timeline = std::vector<TimelineEvent>{};  // never powered
  sc.noise_white_rms = 0.002;
  sc.seed = 17;
  const auto r = analyze(synthesize(sc).signal, {});
  CHECK(r.low_confidence);
  // Expected window maximum of ~2200 Gaussian samples is about 3.6 sigma.
  const double n = 2.0 * 0.025 * 44100.0;
  CHECK(r.peak < 0.002 * std::sqrt(2.0 * std::log(2.0 * n)) * 1.1);
  CHECK(r.peak > 2.0 * 0.002);
}

TEST_CASE("analyze removes hum below the cutoff") {
  auto sc = reference_scenario(20.0, 2.0);
  sc.noise_hum_amp = 0.5;
  const auto with_hum = analyze(synthesize(sc).signal, {});
  sc.noise_hum_amp = 0.0;
  const auto without = analyze(synthesize(sc).signal, {});
  CHECK(with_hum.peak == doctest::Approx(without.peak).epsilon(1e-9));
}

TEST_CASE("analyze preconditions") {
  auto sc = reference_scenario(15.0, 0.05);
  CHECK_THROWS_AS(analyze(synthesize(sc).signal, {}), Error);
  AnalysisOptions o;
  o.window_s = 0.06;
  CHECK_THROWS_AS(analyze(synthesize(reference_scenario()).signal, o), Error);
}
