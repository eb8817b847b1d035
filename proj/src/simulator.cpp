#include "eamon/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "eamon/error.hpp"
#include "eamon/keyvalue.hpp"

namespace eamon {

namespace {

// Pulses are rendered until the envelope falls below 1e-12 of the peak.
const double kSupportDecades = std::log(1e12);

struct PulseSpec {
  double time_s;
  double amplitude;
  bool collision;
};

class PulseRenderer {
 public:
  PulseRenderer(const ScenarioSpec& scenario, double half_period_s)
      : fs_(scenario.sample_rate_hz),
        carrier_hz_(scenario.pulse_carrier_hz),
        decay_s_(effective_decay_s(scenario)),
        cutoff_hz_(scenario.reference_cutoff_hz),
        period_samples_(std::max<long long>(1, std::llround(half_period_s * scenario.sample_rate_hz))),
        support_(static_cast<std::size_t>(std::ceil(decay_s_ * fs_ * kSupportDecades)) + 1) {}

  void add(std::vector<double>& out, double time_s, double amplitude) {
    const double x = time_s * fs_;
    const double first = std::ceil(x - 1e-7);
    if (first >= static_cast<double>(out.size())) return;
    const double frac = std::max(0.0, first - x);
    const double scale = amplitude / reference_peak(frac);
    const auto n0 = static_cast<std::size_t>(std::max(first, 0.0));
    const std::size_t skip = first < 0.0 ? static_cast<std::size_t>(-first) : 0;
    for (std::size_t n = skip; n < support_ && n0 + n - skip < out.size(); ++n) {
      out[n0 + n - skip] += scale * shape(static_cast<double>(n) + frac);
    }
  }

 private:
  double shape(double samples_after_onset) const {
    const double t = samples_after_onset / fs_;
    return std::exp(-t / decay_s_) * std::cos(2.0 * std::numbers::pi * carrier_hz_ * t);
  }

  // Peak magnitude of one switch period of a steady train of unit pulses after the
  // reference high-pass, on the sample grid implied by the fractional onset.
  double reference_peak(double frac) {
    const auto key = std::llround(frac * 1e9);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::vector<double> period(static_cast<std::size_t>(period_samples_), 0.0);
    for (std::size_t n = 0; n < support_; ++n) {
      period[n % period.size()] += shape(static_cast<double>(n) + frac);
    }
    double peak;
    if (cutoff_hz_ > 0.0) {
      peak = peak_abs(fft_highpass(SampledSignal(std::move(period), fs_), FilterSpec{cutoff_hz_}));
    } else {
      peak = peak_abs(period);
    }
    cache_.emplace(key, peak);
    return peak;
  }

  double fs_;
  double carrier_hz_;
  double decay_s_;
  double cutoff_hz_;
  long long period_samples_;
  std::size_t support_;
  std::map<long long, double> cache_;
};

std::size_t sample_count(const ScenarioSpec& s) {
  return static_cast<std::size_t>(std::llround(s.duration_s * s.sample_rate_hz));
}

// Switch-synchronous pulses of one pad, following its timeline.
std::vector<PulseSpec> schedule_pulses(const ScenarioSpec& scenario, const DriveConfig& drive, double gain,
                                       GroundTruth& truth, int pad_id) {
  const auto amplitude_at = [&](double mass_g) {
    return gain * peak_amplitude(scenario.model, {mass_g, scenario.object.contact_area_mm2}, drive);
  };

  std::vector<PulseSpec> pulses;
  bool powered = !scenario.timeline.has_value();
  bool contact = powered;
  double mass = scenario.object.mass_g;
  const std::vector<TimelineEvent> events = scenario.timeline.value_or(std::vector<TimelineEvent>{});
  std::size_t next_event = 0;

  const auto apply_event = [&](const TimelineEvent& e) {
    switch (e.kind) {
      case TimelineKind::PowerOn:
        powered = true;
        break;
      case TimelineKind::Contact:
        if (powered && !contact && e.time_s < scenario.duration_s) {
          pulses.push_back({e.time_s, kCollisionFactor * amplitude_at(mass), true});
        }
        contact = true;
        break;
      case TimelineKind::MassSet:
        mass = e.mass_g;
        break;
      case TimelineKind::PowerOff:
        powered = false;
        contact = false;
        break;
    }
  };

  for (double t : expected_pulse_times(drive, scenario.duration_s)) {
    while (next_event < events.size() && events[next_event].time_s <= t) apply_event(events[next_event++]);
    if (powered && contact) pulses.push_back({t, amplitude_at(mass), false});
  }
  while (next_event < events.size()) apply_event(events[next_event++]);

  std::stable_sort(pulses.begin(), pulses.end(),
                   [](const PulseSpec& a, const PulseSpec& b) { return a.time_s < b.time_s; });
  for (const PulseSpec& p : pulses) truth.pulses.push_back({p.time_s, p.amplitude, pad_id, p.collision});
  truth.timeline = events;
  return pulses;
}

GroundTruth render_pad(std::vector<double>& out, const ScenarioSpec& scenario, const DriveConfig& drive, double gain,
                       int pad_id) {
  GroundTruth truth;
  const DriveConfig canon = drive.canonical();
  const auto pulses = schedule_pulses(scenario, canon, gain, truth, pad_id);
  PulseRenderer renderer(scenario, canon.half_period_s());
  for (const PulseSpec& p : pulses) renderer.add(out, p.time_s, p.amplitude);
  return truth;
}

void add_noise(std::vector<double>& out, const ScenarioSpec& s) {
  if (s.noise_white_rms > 0.0) {
    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> white(0.0, s.noise_white_rms);
    for (double& v : out) v += white(rng);
  }
  if (s.noise_hum_amp > 0.0) {
    const double w = 2.0 * std::numbers::pi * s.hum_hz / s.sample_rate_hz;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s.noise_hum_amp * std::sin(w * static_cast<double>(i));
  }
}

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidScenario, what); }

}  // namespace

bool in_validity_box(const ObjectSpec& object, const DriveConfig& drive, const ValidityBox& box) {
  const auto within = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  return within(drive.amplitude_v, box.volts_min, box.volts_max) && within(object.mass_g, box.mass_min, box.mass_max) &&
         within(object.contact_area_mm2, box.area_min, box.area_max) &&
         within(drive.frequency_hz, box.freq_min, box.freq_max);
}

void validate_model(const AmplitudeModel& model, const ValidityBox& box) {
  // Each factor is affine in its own parameter (log f for frequency), so its minimum over
  // the box sits at an end of the range.
  const double base = std::min(model.slope_a * box.mass_min + model.intercept_b,
                               model.slope_a * box.mass_max + model.intercept_b);
  const double volts = std::min(box.volts_min, box.volts_max) / model.v_ref;
  const double area = std::min(1.0 + model.area_gain_coeff * (box.area_min / model.s_ref - 1.0),
                               1.0 + model.area_gain_coeff * (box.area_max / model.s_ref - 1.0));
  const double freq = std::min(1.0 + model.freq_gain_coeff * std::log10(box.freq_min / model.f_ref),
                               1.0 + model.freq_gain_coeff * std::log10(box.freq_max / model.f_ref));
  if (!(model.v_ref > 0.0 && model.s_ref > 0.0 && model.f_ref > 0.0)) {
    throw Error(Errc::NonPositiveAmplitude, "model reference values must be positive");
  }
  if (!(base > 0.0 && volts > 0.0 && area > 0.0 && freq > 0.0)) {
    throw Error(Errc::NonPositiveAmplitude,
                fmt::format("model is not positive on the validity box (mass {:.4g}, voltage {:.4g}, area {:.4g}, "
                            "frequency {:.4g})",
                            base, volts, area, freq));
  }
}

double peak_amplitude(const AmplitudeModel& model, const ObjectSpec& object, const DriveConfig& drive) {
  if (!(object.mass_g > 0.0 && object.contact_area_mm2 > 0.0)) {
    throw Error(Errc::InvalidArgument, "object mass and contact area must be positive");
  }
  if (!(drive.frequency_hz > 0.0 && drive.amplitude_v > 0.0)) {
    throw Error(Errc::InvalidArgument, "drive amplitude and frequency must be positive");
  }
  const double base = model.slope_a * object.mass_g + model.intercept_b;
  const double volts = drive.amplitude_v / model.v_ref;
  const double area = 1.0 + model.area_gain_coeff * (object.contact_area_mm2 / model.s_ref - 1.0);
  const double freq = 1.0 + model.freq_gain_coeff * std::log10(drive.frequency_hz / model.f_ref);
  const double a = base * volts * area * freq;
  if (!(a > 0.0)) {
    throw Error(Errc::NonPositiveAmplitude,
                fmt::format("amplitude {:.6g} at m={} g, V={} V, S={} mm^2, f={} Hz", a, object.mass_g,
                            drive.amplitude_v, object.contact_area_mm2, drive.frequency_hz));
  }
  return a;
}

std::string_view to_string(TimelineKind kind) noexcept {
  switch (kind) {
    case TimelineKind::PowerOn: return "PowerOn";
    case TimelineKind::Contact: return "Contact";
    case TimelineKind::MassSet: return "MassSet";
    case TimelineKind::PowerOff: return "PowerOff";
  }
  return "Unknown";
}

double effective_decay_s(const ScenarioSpec& scenario) {
  return std::min(scenario.pulse_decay_s, scenario.drive.half_period_s() / 8.0);
}

void validate_scenario(const ScenarioSpec& s) {
  if (!(s.sample_rate_hz > 0.0)) invalid("sample rate must be positive");
  if (!(s.duration_s > 0.0)) invalid("duration must be positive");
  if (sample_count(s) == 0) invalid("duration is shorter than one sample");
  if (!(s.drive.frequency_hz > 0.0 && s.drive.amplitude_v > 0.0)) invalid("drive amplitude and frequency must be positive");
  if (!(s.object.mass_g > 0.0 && s.object.contact_area_mm2 > 0.0)) invalid("object mass and area must be positive");
  if (!(s.pulse_decay_s > 0.0)) invalid("pulse decay must be positive");
  if (!(s.pulse_carrier_hz < s.sample_rate_hz / 2.0)) invalid("pulse carrier must be below Nyquist");
  if (!(s.reference_cutoff_hz >= 0.0)) invalid("reference cutoff must be non-negative");
  if (s.reference_cutoff_hz > 0.0) {
    if (!(s.reference_cutoff_hz < s.sample_rate_hz / 2.0)) invalid("reference cutoff must be below Nyquist");
    if (!(s.pulse_carrier_hz > s.reference_cutoff_hz)) {
      invalid(fmt::format("pulse carrier {} Hz must exceed the {} Hz cutoff", s.pulse_carrier_hz,
                          s.reference_cutoff_hz));
    }
    if (s.noise_hum_amp > 0.0 && !(s.hum_hz < s.reference_cutoff_hz)) {
      invalid(fmt::format("hum at {} Hz must sit below the {} Hz cutoff", s.hum_hz, s.reference_cutoff_hz));
    }
  }
  if (!(s.noise_white_rms >= 0.0 && s.noise_hum_amp >= 0.0)) invalid("noise levels must be non-negative");
  if (!(s.gain > 0.0)) invalid("gain must be positive");
  if (s.timeline) {
    for (std::size_t i = 0; i < s.timeline->size(); ++i) {
      const TimelineEvent& e = (*s.timeline)[i];
      if (!(e.time_s >= 0.0)) invalid("timeline times must be non-negative");
      if (i > 0 && !(e.time_s > (*s.timeline)[i - 1].time_s)) invalid("timeline times must strictly increase");
      if (e.kind == TimelineKind::MassSet && !(e.mass_g > 0.0)) invalid("MassSet needs a positive mass");
    }
  }
  try {
    validate_model(s.model);
  } catch (const Error& e) {
    invalid(e.what());
  }
}

Synthesis synthesize(const ScenarioSpec& scenario) {
  validate_scenario(scenario);
  std::vector<double> samples(sample_count(scenario), 0.0);
  GroundTruth truth = render_pad(samples, scenario, scenario.drive, scenario.gain, 0);
  add_noise(samples, scenario);
  return {SampledSignal(std::move(samples), scenario.sample_rate_hz), std::move(truth)};
}

MultiSynthesis synthesize_multi(std::span<const PadSource> pads, const ScenarioSpec& shared) {
  validate_scenario(shared);
  std::vector<PadChannel> channels;
  for (const PadSource& pad : pads) channels.push_back(pad.channel);
  if (channels.empty()) throw Error(Errc::EmptyPads, "synthesize_multi needs at least one pad");
  check_gates(channels, demux_window_s(channels));
  if (shared.timeline) {
    for (const TimelineEvent& e : *shared.timeline) {
      if (e.kind == TimelineKind::MassSet) invalid("MassSet is ambiguous in a multi-pad scene");
    }
  }

  std::vector<double> samples(sample_count(shared), 0.0);
  MultiSynthesis out{SampledSignal({}, shared.sample_rate_hz), {}};
  for (const PadSource& pad : pads) {
    ScenarioSpec spec = shared;
    spec.drive = pad.channel.drive;
    spec.object = pad.object;
    spec.gain = pad.gain;
    validate_scenario(spec);
    out.per_pad.push_back(render_pad(samples, spec, spec.drive, spec.gain, pad.channel.pad_id));
  }
  add_noise(samples, shared);
  out.signal = SampledSignal(std::move(samples), shared.sample_rate_hz);
  return out;
}

double noise_rms_for_snr(const ScenarioSpec& scenario, double snr_db) {
  ScenarioSpec clean = scenario;
  clean.noise_white_rms = 0.0;
  clean.noise_hum_amp = 0.0;
  const Synthesis s = synthesize(clean);
  return rms(s.signal.samples()) / std::pow(10.0, snr_db / 20.0);
}

ScenarioSpec reference_scenario(double mass_g, double duration_s) {
  ScenarioSpec s;
  s.drive = {600.0, 5.0, 0.0};
  s.object = {mass_g, 2500.0};
  s.duration_s = duration_s;
  return s;
}

std::vector<PadSource> two_pad_sources() {
  const AmplitudeModel model;
  const DriveConfig first{600.0, 5.0, 0.0};
  const DriveConfig second{600.0, 5.0, 0.05};
  const ObjectSpec heavy{25.0, 2500.0};
  const ObjectSpec light{15.0, 2500.0};
  return {
      {{0, first}, heavy, 0.056 / peak_amplitude(model, heavy, first)},
      {{1, second}, light, 0.037 / peak_amplitude(model, light, second)},
  };
}

ScenarioSpec transport_scenario() {
  ScenarioSpec s = reference_scenario(20.0, 6.0);
  s.noise_white_rms = 0.0015;
  s.seed = 7;
  s.timeline = std::vector<TimelineEvent>{
      {0.0, TimelineKind::PowerOn, 0.0},
      {1.0, TimelineKind::Contact, 0.0},
      {3.0, TimelineKind::MassSet, 30.0},
      {5.0, TimelineKind::PowerOff, 0.0},
  };
  return s;
}

namespace {

TimelineKind timeline_kind_from(std::string_view name, const std::string& where) {
  for (TimelineKind k : {TimelineKind::PowerOn, TimelineKind::Contact, TimelineKind::MassSet, TimelineKind::PowerOff}) {
    if (to_string(k) == name) return k;
  }
  throw Error(Errc::ParseError, where + ": unknown timeline event '" + std::string(name) + "'");
}

TimelineEvent parse_event(const std::string& text, const std::string& where) {
  std::istringstream in(text);
  std::string time, kind, mass, extra;
  in >> time >> kind >> mass >> extra;
  if (time.empty() || kind.empty() || !extra.empty()) {
    throw Error(Errc::ParseError, where + ": expected '<time_s> <event> [mass_g]', got '" + text + "'");
  }
  TimelineEvent e{parse_double(time, "event time"), timeline_kind_from(kind, where), 0.0};
  if (e.kind == TimelineKind::MassSet) {
    if (mass.empty()) throw Error(Errc::ParseError, where + ": MassSet needs a mass");
    e.mass_g = parse_double(mass, "MassSet mass");
  } else if (!mass.empty()) {
    throw Error(Errc::ParseError, where + ": only MassSet takes a mass");
  }
  return e;
}

std::vector<double> list_or(const KeyValueFile& kv, std::string_view key, std::vector<double> fallback) {
  const auto v = kv.find(key);
  return v ? parse_double_list(*v, key) : fallback;
}

double pick(const std::vector<double>& values, std::size_t i, std::string_view key, std::size_t pads) {
  if (values.size() == 1) return values.front();
  if (values.size() != pads) {
    throw Error(Errc::ParseError, fmt::format("{} lists {} values for {} pads", key, values.size(), pads));
  }
  return values[i];
}

}  // namespace

std::vector<TimelineEvent> parse_timeline(std::string_view text, const std::string& origin) {
  std::vector<TimelineEvent> events;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    events.push_back(parse_event(line, origin + ":" + std::to_string(line_no)));
  }
  return events;
}

ScenarioFile parse_scenario(std::string_view text, const std::string& origin) {
  const KeyValueFile kv = KeyValueFile::parse(text, origin);
  ScenarioFile file;
  ScenarioSpec& s = file.scenario;
  s.drive.amplitude_v = kv.get_double("amplitude_v", s.drive.amplitude_v);
  s.drive.frequency_hz = kv.get_double("frequency_hz", s.drive.frequency_hz);
  s.duration_s = kv.get_double("duration_s", s.duration_s);
  s.sample_rate_hz = kv.get_double("sample_rate_hz", s.sample_rate_hz);
  s.pulse_carrier_hz = kv.get_double("pulse_carrier_hz", s.pulse_carrier_hz);
  s.pulse_decay_s = kv.get_double("pulse_decay_s", s.pulse_decay_s);
  s.noise_white_rms = kv.get_double("noise_white_rms", s.noise_white_rms);
  s.noise_hum_amp = kv.get_double("noise_hum_amp", s.noise_hum_amp);
  s.hum_hz = kv.get_double("hum_hz", s.hum_hz);
  s.reference_cutoff_hz = kv.get_double("reference_cutoff_hz", s.reference_cutoff_hz);
  const double seed = kv.get_double("seed", 0.0);
  if (seed < 0.0 || seed != std::floor(seed)) throw Error(Errc::ParseError, origin + ": seed must be a whole number");
  s.seed = static_cast<std::uint64_t>(seed);

  AmplitudeModel& m = s.model;
  m.slope_a = kv.get_double("slope_a", m.slope_a);
  m.intercept_b = kv.get_double("intercept_b", m.intercept_b);
  m.v_ref = kv.get_double("v_ref", m.v_ref);
  m.area_gain_coeff = kv.get_double("area_gain_coeff", m.area_gain_coeff);
  m.s_ref = kv.get_double("s_ref", m.s_ref);
  m.freq_gain_coeff = kv.get_double("freq_gain_coeff", m.freq_gain_coeff);
  m.f_ref = kv.get_double("f_ref", m.f_ref);

  const auto events = kv.all("event");
  if (!events.empty()) {
    std::vector<TimelineEvent> timeline;
    for (const auto& e : events) timeline.push_back(parse_event(e, origin));
    s.timeline = std::move(timeline);
  } else if (const auto on = kv.find("always_on"); on && *on == "false") {
    s.timeline = std::vector<TimelineEvent>{};
  } else if (on && *on != "true") {
    throw Error(Errc::ParseError, origin + ": always_on must be true or false");
  }

  const double pad_count = kv.get_double("pads", 1.0);
  if (pad_count < 1.0 || pad_count != std::floor(pad_count)) {
    throw Error(Errc::ParseError, origin + ": pads must be a positive whole number");
  }
  const auto n = static_cast<std::size_t>(pad_count);
  const double h = s.drive.half_period_s();
  std::vector<double> spread;
  for (std::size_t i = 0; i < n; ++i) spread.push_back(h * static_cast<double>(i) / static_cast<double>(n));
  const auto masses = list_or(kv, "mass_g", {s.object.mass_g});
  const auto areas = list_or(kv, "contact_area_mm2", {s.object.contact_area_mm2});
  const auto offsets = list_or(kv, "phase_offset_s", spread);
  const auto gains = list_or(kv, "pad_gain", {1.0});

  s.object = {pick(masses, 0, "mass_g", n), pick(areas, 0, "contact_area_mm2", n)};
  s.drive.phase_offset_s = pick(offsets, 0, "phase_offset_s", n);
  s.gain = pick(gains, 0, "pad_gain", n);
  if (n > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      PadSource pad;
      pad.channel = {static_cast<int>(i), {s.drive.amplitude_v, s.drive.frequency_hz, pick(offsets, i, "phase_offset_s", n)}};
      pad.object = {pick(masses, i, "mass_g", n), pick(areas, i, "contact_area_mm2", n)};
      pad.gain = pick(gains, i, "pad_gain", n);
      file.pads.push_back(pad);
    }
  }
  return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

}  // namespace eamon
