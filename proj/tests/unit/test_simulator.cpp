#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "eamon/demux.hpp"
#include "eamon/error.hpp"
#include "eamon/pipeline.hpp"
#include "eamon/simulator.hpp"
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

const AmplitudeModel kModel;

double amp(double m, double v = 600.0, double s = 2500.0, double f = 5.0) {
  return peak_amplitude(kModel, {m, s}, {v, f, 0.0});
}

}  // namespace

TEST_CASE("amplitude anchors") {
  CHECK(std::abs(amp(15.0) - 0.068) < 1e-12);
  CHECK(std::abs(amp(25.0) - 0.084) < 1e-12);
  CHECK(std::abs(amp(15.0, 300.0) - 0.034) < 1e-12);
  CHECK(amp(15.0, 600.0, 900.0) == doctest::Approx(0.068 * (1.0 + 0.4 * (900.0 / 2500.0 - 1.0))));
  CHECK(amp(15.0, 600.0, 2500.0, 50.0) == doctest::Approx(0.068 * 1.15));
}

TEST_CASE("amplitude errors") {
  CHECK(code_of([] { amp(0.0); }) == Errc::InvalidArgument);
  CHECK(code_of([] { amp(15.0, 0.0); }) == Errc::InvalidArgument);
  AmplitudeModel bad;
  bad.intercept_b = -1.0;
  CHECK(code_of([&] { peak_amplitude(bad, {15.0, 2500.0}, {600.0, 5.0, 0.0}); }) == Errc::NonPositiveAmplitude);
  CHECK(code_of([&] { validate_model(bad); }) == Errc::NonPositiveAmplitude);
  AmplitudeModel steep;
  steep.freq_gain_coeff = 2.0;  // 1 + 2 log10(1/5) < 0 at 1 Hz
  CHECK(code_of([&] { validate_model(steep); }) == Errc::NonPositiveAmplitude);
  CHECK_NOTHROW(validate_model(kModel));
}

TEST_CASE("validity box") {
  CHECK(in_validity_box({15.0, 2500.0}, {600.0, 5.0, 0.0}));
  CHECK_FALSE(in_validity_box({1.25, 2500.0}, {600.0, 5.0, 0.0}));
  CHECK_FALSE(in_validity_box({15.0, 2500.0}, {800.0, 5.0, 0.0}));
  CHECK_FALSE(in_validity_box({15.0, 400.0}, {600.0, 5.0, 0.0}));
  CHECK_FALSE(in_validity_box({15.0, 2500.0}, {600.0, 2000.0, 0.0}));
}

TEST_CASE("property: amplitude is strictly increasing in m, V, S and log f on a dense grid") {
  const int n = 24;  // 24^4 > 10^4 points, each checked along all four axes
  const auto at = [&](int i, double lo, double hi) { return lo + (hi - lo) * i / (n - 1); };
  const auto fat = [&](int i) { return std::pow(10.0, at(i, 0.0, 3.0)); };
  long checked = 0;
  for (int im = 0; im < n; ++im) {
    for (int iv = 0; iv < n; ++iv) {
      for (int is = 0; is < n; ++is) {
        for (int jf = 0; jf < n; ++jf) {
          const double m = at(im, 10.0, 30.0), v = at(iv, 300.0, 700.0), s = at(is, 900.0, 2500.0), f = fat(jf);
          const double a = amp(m, v, s, f);
          REQUIRE(a > 0.0);
          if (im + 1 < n) REQUIRE(amp(at(im + 1, 10.0, 30.0), v, s, f) > a);
          if (iv + 1 < n) REQUIRE(amp(m, at(iv + 1, 300.0, 700.0), s, f) > a);
          if (is + 1 < n) REQUIRE(amp(m, v, at(is + 1, 900.0, 2500.0), f) > a);
          if (jf + 1 < n) REQUIRE(amp(m, v, s, fat(jf + 1)) > a);
          ++checked;
        }
      }
    }
  }
  CHECK(checked >= 10000);
}

TEST_CASE("heavier objects grow faster with frequency") {
  CHECK(amp(30.0, 600.0, 2500.0, 1000.0) - amp(30.0) > amp(10.0, 600.0, 2500.0, 1000.0) - amp(10.0));
}

TEST_CASE("scenario validation") {
  const auto bad = [](auto mutate) {
    auto s = reference_scenario();
    mutate(s);
    return code_of([&] { validate_scenario(s); });
  };
  CHECK_NOTHROW(validate_scenario(reference_scenario()));
  CHECK(bad([](ScenarioSpec& s) { s.pulse_carrier_hz = 800.0; }) == Errc::InvalidScenario);
  CHECK(bad([](ScenarioSpec& s) {
          s.hum_hz = 1500.0;
          s.noise_hum_amp = 0.1;
        }) == Errc::InvalidScenario);
  CHECK(bad([](ScenarioSpec& s) { s.noise_white_rms = -1.0; }) == Errc::InvalidScenario);
  CHECK(bad([](ScenarioSpec& s) { s.duration_s = 0.0; }) == Errc::InvalidScenario);
  CHECK(bad([](ScenarioSpec& s) {
          s.timeline = std::vector<TimelineEvent>{{1.0, TimelineKind::PowerOn}, {1.0, TimelineKind::Contact}};
        }) == Errc::InvalidScenario);
  CHECK(bad([](ScenarioSpec& s) { s.model.intercept_b = -0.5; }) == Errc::InvalidScenario);
  CHECK(code_of([] {
          auto s = reference_scenario();
          s.pulse_carrier_hz = 500.0;
          synthesize(s);
        }) == Errc::InvalidScenario);
}

TEST_CASE("seed determinism") {
  auto s = reference_scenario(20.0, 1.0);
  s.noise_white_rms = 0.01;
  s.noise_hum_amp = 0.2;
  s.seed = 42;
  const auto a = synthesize(s);
  const auto b = synthesize(s);
  CHECK(std::ranges::equal(a.signal.samples(), b.signal.samples()));
  s.seed = 43;
  CHECK_FALSE(std::ranges::equal(a.signal.samples(), synthesize(s).signal.samples()));
}

TEST_CASE("ground truth amplitudes equal the model exactly") {
  const auto sc = transport_scenario();
  const auto syn = synthesize(sc);
  int collisions = 0;
  for (const auto& p : syn.truth.pulses) {
    const double mass = p.time_s < 3.0 ? 20.0 : 30.0;
    const double expect = peak_amplitude(sc.model, {mass, sc.object.contact_area_mm2}, sc.drive);
    if (p.collision) {
      ++collisions;
      CHECK(p.amplitude == kCollisionFactor * expect);
      CHECK(p.time_s == 1.0);
    } else {
      CHECK(p.amplitude == expect);
      CHECK(p.time_s >= 1.0);
      CHECK(p.time_s < 5.0);
    }
  }
  CHECK(collisions == 1);
  CHECK(syn.truth.timeline == *sc.timeline);
}

TEST_CASE("reference closed loop and filter compatibility") {
  const auto syn = synthesize(reference_scenario(15.0, 2.0));
  CHECK(syn.truth.pulses.size() == 20);
  const auto clean = preprocess(syn.signal, 1000.0, 1.0);
  const auto train = extract_pulse_train(clean, {600.0, 5.0, 0.0}, 0.025);
  REQUIRE(train.pulses.size() == 20);
  for (std::size_t k = 0; k < 20; ++k) {
    // Filtered peak within 5% of the injected amplitude.
    CHECK(std::abs(train.pulses[k].peak - syn.truth.pulses[k].amplitude) < 0.05 * syn.truth.pulses[k].amplitude);
  }
  CHECK(peak_statistic(train) == doctest::Approx(0.068).epsilon(0.02));
}

TEST_CASE("hum is removed completely by the filter") {
  auto s = reference_scenario(15.0, 2.0);
  s.timeline = std::vector<TimelineEvent>{};
  s.noise_hum_amp = 0.5;
  const auto syn = synthesize(s);
  CHECK(rms(syn.signal.samples()) == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(rms(fft_highpass(syn.signal, {1000.0}).samples()) < 1e-9);
}

TEST_CASE("noise-only recordings stay near the Gaussian window maximum") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    auto s = reference_scenario(15.0, 2.0);
    s.timeline = std::vector<TimelineEvent>{};
    s.noise_white_rms = 0.003;
    s.seed = seed;
    const auto syn = synthesize(s);
    CHECK(syn.truth.pulses.empty());
    AnalysisOptions o;
    o.phase_offset_s = 0.0;
    const auto r = analyze(syn.signal, o);
    const double n = 2.0 * 0.025 * 44100.0;
    CHECK(r.peak < 0.003 * std::sqrt(2.0 * std::log(2.0 * n)) * 1.1);
  }
}

TEST_CASE("SNR helper realizes the requested ratio") {
  auto s = reference_scenario(20.0, 2.0);
  s.seed = 5;
  const auto clean = synthesize(s).signal;
  s.noise_white_rms = noise_rms_for_snr(s, 20.0);
  const auto noisy = synthesize(s).signal;
  std::vector<double> noise(clean.size());
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = noisy.samples()[i] - clean.samples()[i];
  CHECK(20.0 * std::log10(rms(clean.samples()) / rms(noise)) == doctest::Approx(20.0).epsilon(0.01));
}

TEST_CASE("timelines gate pulses") {
  auto s = reference_scenario(15.0, 2.0);
  s.timeline = std::vector<TimelineEvent>{{0.0, TimelineKind::PowerOn}, {0.55, TimelineKind::Contact},
                                          {1.55, TimelineKind::PowerOff}};
  const auto syn = synthesize(s);
  REQUIRE(syn.truth.pulses.size() == 11);
  CHECK(syn.truth.pulses[0].collision);
  CHECK(syn.truth.pulses[0].time_s == 0.55);
  CHECK(syn.truth.pulses[1].time_s == doctest::Approx(0.6));
  CHECK(syn.truth.pulses.back().time_s == doctest::Approx(1.5));

  // Contact while unpowered is silent, no collision.
  s.timeline = std::vector<TimelineEvent>{{0.2, TimelineKind::Contact}, {0.95, TimelineKind::PowerOn}};
  const auto late = synthesize(s);
  REQUIRE_FALSE(late.truth.pulses.empty());
  CHECK_FALSE(late.truth.pulses[0].collision);
  CHECK(late.truth.pulses[0].time_s == doctest::Approx(1.0));
}

TEST_CASE("decay is capped at an eighth of the half period") {
  auto s = reference_scenario();
  CHECK(effective_decay_s(s) == 0.005);
  s.drive.frequency_hz = 500.0;
  CHECK(effective_decay_s(s) == doctest::Approx(0.000125));
}

TEST_CASE("multi-pad synthesis") {
  SUBCASE("single pad equals synthesize") {
    auto shared = reference_scenario(18.0, 1.0);
    shared.noise_white_rms = 0.002;
    shared.seed = 9;
    const std::vector<PadSource> one{{{0, shared.drive}, shared.object, 1.0}};
    const auto multi = synthesize_multi(one, shared);
    CHECK(std::ranges::equal(multi.signal.samples(), synthesize(shared).signal.samples()));
  }
  SUBCASE("three evenly offset pads give a 6f pulse rate") {
    std::vector<PadSource> pads;
    for (int i = 0; i < 3; ++i) pads.push_back({{i, {600.0, 5.0, 0.1 * i / 3.0}}, {15.0, 2500.0}, 1.0});
    const auto multi = synthesize_multi(pads, reference_scenario(15.0, 1.0));
    std::size_t total = 0;
    for (const auto& t : multi.per_pad) total += t.pulses.size();
    CHECK(total == 30);
  }
  SUBCASE("overlapping gates and misuse") {
    const std::vector<PadSource> close{{{0, {600.0, 5.0, 0.0}}, {15.0, 2500.0}, 1.0},
                                       {{1, {600.0, 5.0, 0.0}}, {25.0, 2500.0}, 1.0}};
    CHECK(code_of([&] { synthesize_multi(close, reference_scenario()); }) == Errc::OverlappingGates);
    CHECK(code_of([] { synthesize_multi({}, reference_scenario()); }) == Errc::EmptyPads);
  }
}

TEST_CASE("two-pad preset anchors") {
  const auto pads = two_pad_sources();
  REQUIRE(pads.size() == 2);
  CHECK(pads[0].object.mass_g == 25.0);
  CHECK(pads[1].object.mass_g == 15.0);
  CHECK(pads[1].channel.drive.phase_offset_s == doctest::Approx(0.05));
  const auto syn = synthesize_multi(pads, reference_scenario());
  CHECK(syn.per_pad[0].pulses[0].amplitude == doctest::Approx(0.056).epsilon(1e-12));
  CHECK(syn.per_pad[1].pulses[0].amplitude == doctest::Approx(0.037).epsilon(1e-12));
}

TEST_CASE("scenario files") {
  const auto file = parse_scenario(
      "amplitude_v = 500\nfrequency_hz = 10\nduration_s = 1.5\nmass_g = 22\ncontact_area_mm2 = 1600\n"
      "noise_white_rms = 0.001\nseed = 12\nevent = 0 PowerOn\nevent = 0.3 Contact\nevent = 0.8 MassSet 27\n");
  CHECK(file.pads.empty());
  const auto& s = file.scenario;
  CHECK(s.drive.amplitude_v == 500.0);
  CHECK(s.drive.frequency_hz == 10.0);
  CHECK(s.duration_s == 1.5);
  CHECK(s.object.mass_g == 22.0);
  CHECK(s.object.contact_area_mm2 == 1600.0);
  CHECK(s.seed == 12);
  REQUIRE(s.timeline.has_value());
  REQUIRE(s.timeline->size() == 3);
  CHECK((*s.timeline)[2] == TimelineEvent{0.8, TimelineKind::MassSet, 27.0});

  const auto two = parse_scenario("pads = 2\nmass_g = 25, 15\npad_gain = 0.6, 0.5\n");
  REQUIRE(two.pads.size() == 2);
  CHECK(two.pads[1].object.mass_g == 15.0);
  CHECK(two.pads[1].gain == 0.5);
  CHECK(two.pads[1].channel.drive.phase_offset_s == doctest::Approx(0.05));

  CHECK(code_of([] { parse_scenario("frequency_hz = fast\n"); }) == Errc::ParseError);
  CHECK(code_of([] { parse_scenario("pads = 2\nmass_g = 1, 2, 3\n"); }) == Errc::ParseError);
  CHECK(code_of([] { parse_timeline("0.5 Explode\n"); }) == Errc::ParseError);
  CHECK(code_of([] { parse_timeline("0.5 MassSet\n"); }) == Errc::ParseError);
  CHECK(parse_timeline("# comment\n0 PowerOn\n\n1.0 Contact\n").size() == 2);
}

TEST_CASE("shipped scenario files load") {
  const std::filesystem::path dir = EAMON_SCENARIO_DIR;
  const auto ref = load_scenario(dir / "reference.scn");
  CHECK(ref.pads.empty());
  CHECK(ref.scenario.object.mass_g == 15.0);
  CHECK_FALSE(ref.scenario.timeline.has_value());

  const auto two = load_scenario(dir / "two_pad.scn");
  REQUIRE(two.pads.size() == 2);
  const auto presets = two_pad_sources();
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(two.pads[i].gain == doctest::Approx(presets[i].gain).epsilon(1e-9));
    CHECK(two.pads[i].object.mass_g == presets[i].object.mass_g);
  }

  const auto transport = load_scenario(dir / "transport.scn");
  const auto preset = transport_scenario();
  CHECK(*transport.scenario.timeline == *preset.timeline);
  CHECK(transport.scenario.noise_white_rms == preset.noise_white_rms);
  CHECK(transport.scenario.seed == preset.seed);
  CHECK(std::ranges::equal(synthesize(transport.scenario).signal.samples(), synthesize(preset).signal.samples()));
}
