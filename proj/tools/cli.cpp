#include "cli.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <optional>
#include <ostream>

#include "eamon/calibration.hpp"
#include "eamon/demux.hpp"
#include "eamon/error.hpp"
#include "eamon/export.hpp"
#include "eamon/keyvalue.hpp"
#include "eamon/monitor.hpp"
#include "eamon/pipeline.hpp"
#include "eamon/simulator.hpp"
#include "eamon/wav.hpp"

namespace eamon::cli {

namespace {

enum class OutputFormat { Human, Csv, Lines };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<double> sample_rate;
  double cutoff_hz = 1000.0;
  std::optional<double> window_s;
  std::optional<std::uint64_t> seed;
  std::string output;
  OutputFormat format = OutputFormat::Human;
};

struct SimulateArgs {
  std::string scenario;
  std::string preset;
  std::string mass;
  double area = 2500.0;
  double volts = 600.0;
  double freq = 5.0;
  double duration = 2.0;
  std::string phase;
  std::string timeline;
  int pads = 1;
  std::string pad_gain;
  double noise_rms = 0.0;
  double hum_amp = 0.0;
  std::optional<double> snr_db;
  std::string wav_format = "float32";
  std::string truth;
};

struct AnalyzeArgs {
  std::string input;
  double freq = 5.0;
  double volts = 600.0;
  std::string phase = "auto";
  std::string statistic = "median";
  std::string csv;
  double fullscale = 1.0;
};

struct CalibrateArgs {
  std::vector<std::string> points;
  std::string out;
  double volts = 600.0;
  double freq = 5.0;
};

struct EstimateArgs {
  AnalyzeArgs analyze;
  std::string model;
};

struct DemuxArgs {
  std::string input;
  double freq = 5.0;
  double volts = 600.0;
  std::string offsets;
};

struct MonitorArgs {
  std::string input;
  double freq = 5.0;
  double volts = 600.0;
  std::string phase = "auto";
  std::string config;
};

std::string sig3(double v) { return fmt::format("{:.3g}", v); }
std::string full(double v) { return fmt::format("{:.17g}", v); }

void require_positive(double v, std::string_view flag) {
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(fmt::format("{} must be positive", flag));
}

void emit(const Globals& g, std::ostream& out, const std::string& text) {
  if (g.output.empty()) {
    out << text;
  } else {
    write_text_file(g.output, text);
  }
}

std::optional<double> parse_phase(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    return parse_double(text, "--phase");
  } catch (const Error&) {
    throw UsageError("--phase must be 'auto' or a time in seconds");
  }
}

PeakStatistic parse_statistic(const std::string& text) {
  if (text == "median") return PeakStatistic::Median;
  if (text == "mean") return PeakStatistic::Mean;
  if (text == "max") return PeakStatistic::Max;
  throw UsageError("--statistic must be median, mean or max");
}

std::vector<double> parse_list_flag(const std::string& text, std::string_view flag) {
  try {
    return parse_double_list(text, flag);
  } catch (const Error&) {
    throw UsageError(fmt::format("{} expects comma-separated numbers, got '{}'", flag, text));
  }
}

AnalysisOptions analysis_options(const Globals& g, const AnalyzeArgs& a) {
  require_positive(a.freq, "--freq");
  require_positive(a.volts, "--volts");
  require_positive(a.fullscale, "--fullscale");
  require_positive(g.cutoff_hz, "--cutoff-hz");
  if (g.window_s) require_positive(*g.window_s, "--window-s");
  AnalysisOptions o;
  o.frequency_hz = a.freq;
  o.amplitude_v = a.volts;
  o.phase_offset_s = parse_phase(a.phase);
  o.window_s = g.window_s;
  o.cutoff_hz = g.cutoff_hz;
  o.fullscale = a.fullscale;
  o.statistic = parse_statistic(a.statistic);
  return o;
}

void warn_low_confidence(const AnalysisResult& r, std::ostream& err) {
  if (r.low_confidence) {
    fmt::print(err, "warning: low confidence: peak {} is within {}x of the noise floor {}\n", sig3(r.peak),
               kConfidenceRatio, sig3(r.noise_floor));
  }
}

// ---------------------------------------------------------------------------------------

int do_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  if (g.output.empty()) throw UsageError("simulate needs --output FILE.wav");
  SampleFormat wav_format;
  if (a.wav_format == "float32") {
    wav_format = SampleFormat::Float32;
  } else if (a.wav_format == "pcm16") {
    wav_format = SampleFormat::Pcm16;
  } else {
    throw UsageError("--wav-format must be float32 or pcm16");
  }
  if ((!a.scenario.empty()) + (!a.preset.empty()) > 1) throw UsageError("--scenario and --preset are exclusive");

  ScenarioSpec scenario;
  std::vector<PadSource> pads;
  if (!a.scenario.empty()) {
    ScenarioFile file = load_scenario(a.scenario);
    scenario = file.scenario;
    pads = std::move(file.pads);
  } else if (!a.preset.empty()) {
    if (a.preset == "reference") {
      scenario = reference_scenario();
    } else if (a.preset == "two-pad") {
      scenario = reference_scenario();
      pads = two_pad_sources();
    } else if (a.preset == "transport") {
      scenario = transport_scenario();
    } else {
      throw UsageError("--preset must be reference, two-pad or transport");
    }
  } else {
    if (a.mass.empty()) throw UsageError("simulate needs --mass (or --scenario / --preset)");
    require_positive(a.area, "--area");
    require_positive(a.volts, "--volts");
    require_positive(a.freq, "--freq");
    require_positive(a.duration, "--duration");
    if (a.pads < 1) throw UsageError("--pads must be at least 1");
    const auto masses = parse_list_flag(a.mass, "--mass");
    for (double m : masses) require_positive(m, "--mass");
    const auto n = static_cast<std::size_t>(a.pads);
    if (masses.size() != 1 && masses.size() != n) throw UsageError("--mass needs one value or one per pad");
    std::vector<double> gains = a.pad_gain.empty() ? std::vector<double>{1.0} : parse_list_flag(a.pad_gain, "--pad-gain");
    if (gains.size() != 1 && gains.size() != n) throw UsageError("--pad-gain needs one value or one per pad");
    const double h = 0.5 / a.freq;
    std::vector<double> offsets;
    if (a.phase.empty()) {
      for (std::size_t i = 0; i < n; ++i) offsets.push_back(h * static_cast<double>(i) / static_cast<double>(n));
    } else {
      offsets = parse_list_flag(a.phase, "--phase");
      if (offsets.size() != n) throw UsageError("--phase needs one offset per pad");
    }

    scenario = reference_scenario(masses.front(), a.duration);
    scenario.drive = {a.volts, a.freq, offsets.front()};
    scenario.object = {masses.front(), a.area};
    scenario.gain = gains.front();
    if (n > 1) {
      for (std::size_t i = 0; i < n; ++i) {
        pads.push_back({{static_cast<int>(i), {a.volts, a.freq, offsets[i]}},
                        {masses.size() == 1 ? masses.front() : masses[i], a.area},
                        gains.size() == 1 ? gains.front() : gains[i]});
      }
    }
    scenario.noise_white_rms = a.noise_rms;
    scenario.noise_hum_amp = a.hum_amp;
    if (!a.timeline.empty()) {
      std::ifstream in(a.timeline);
      if (!in) throw Error(Errc::IoFailure, "cannot open " + a.timeline);
      std::ostringstream buf;
      buf << in.rdbuf();
      scenario.timeline = parse_timeline(buf.str(), a.timeline);
    }
  }
  if (g.sample_rate) {
    require_positive(*g.sample_rate, "--sample-rate");
    scenario.sample_rate_hz = *g.sample_rate;
  }
  if (g.seed) scenario.seed = *g.seed;
  if (a.snr_db) {
    if (!pads.empty()) throw UsageError("--snr-db applies to single-pad scenes only");
    scenario.noise_white_rms = noise_rms_for_snr(scenario, *a.snr_db);
  }

  const auto check_box = [&](const ObjectSpec& object, const DriveConfig& drive) {
    if (!in_validity_box(object, drive)) {
      fmt::print(err, "warning: m={} g, V={} V, S={} mm^2, f={} Hz lies outside the tested range; the amplitude "
                      "model extrapolates\n",
                 object.mass_g, drive.amplitude_v, object.contact_area_mm2, drive.frequency_hz);
    }
  };

  std::vector<GroundTruth> truth;
  std::optional<SampledSignal> signal;
  if (pads.empty()) {
    check_box(scenario.object, scenario.drive);
    Synthesis s = synthesize(scenario);
    signal = std::move(s.signal);
    truth.push_back(std::move(s.truth));
  } else {
    for (const PadSource& p : pads) check_box(p.object, p.channel.drive);
    MultiSynthesis s = synthesize_multi(pads, scenario);
    signal = std::move(s.signal);
    truth = std::move(s.per_pad);
  }

  const WriteReport report = write_wav(*signal, g.output, wav_format);
  if (report.clipped > 0) fmt::print(err, "warning: {} samples clipped to full scale\n", report.clipped);
  const std::string truth_path = a.truth.empty() ? g.output + ".truth.json" : a.truth;
  export_ground_truth(truth, truth_path);

  std::size_t pulses = 0;
  for (const GroundTruth& t : truth) pulses += t.pulses.size();
  fmt::print(out, "wrote {} ({} samples at {} Hz, {} pad(s), {} pulses); ground truth in {}\n", g.output,
             signal->size(), signal->sample_rate_hz(), truth.size(), pulses, truth_path);
  return kSuccess;
}

int do_analyze(const Globals& g, const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const AnalysisOptions options = analysis_options(g, a);
  const SampledSignal recording = read_wav(a.input);
  const AnalysisResult r = analyze(recording, options);
  warn_low_confidence(r, err);
  if (!a.csv.empty()) export_pulse_csv(r.train, a.csv);

  switch (g.format) {
    case OutputFormat::Human:
      emit(g, out, fmt::format("pulses: {}, peak: {}\n", r.train.pulses.size(), sig3(r.peak)));
      break;
    case OutputFormat::Csv:
      emit(g, out, pulse_csv(r.train));
      break;
    case OutputFormat::Lines:
      emit(g, out,
           fmt::format("pulses={}\npeak={}\nphase_offset_s={}\nnoise_floor={}\n", r.train.pulses.size(), full(r.peak),
                       full(r.phase_offset_s), full(r.noise_floor)));
      break;
  }
  return kSuccess;
}

int do_calibrate(const Globals& g, const CalibrateArgs& a, std::ostream& out) {
  if (a.points.size() < 2) throw UsageError("calibrate needs at least two --point P,MASS");
  require_positive(a.volts, "--volts");
  require_positive(a.freq, "--freq");
  const std::string target = !a.out.empty() ? a.out : g.output;
  if (target.empty()) throw UsageError("calibrate needs --out MODELFILE");

  std::vector<CalPoint> points;
  for (const std::string& text : a.points) {
    const auto values = parse_list_flag(text, "--point");
    if (values.size() != 2) throw UsageError("--point expects P,MASS");
    if (!(values[1] > 0.0)) throw UsageError("--point mass must be positive");
    points.push_back({values[1], values[0]});
  }
  const DriveConfig drive{a.volts, a.freq, 0.0};
  const CalibrationModel model =
      points.size() == 2 ? fit_two_point(points[0], points[1], drive) : fit_least_squares(points, drive);
  write_calibration(model, target);
  if (g.format == OutputFormat::Human) {
    fmt::print(out, "P = {} * m + {} (written to {})\n", sig3(model.slope_a), sig3(model.intercept_b), target);
  } else {
    fmt::print(out, "slope_a={}\nintercept_b={}\n", full(model.slope_a), full(model.intercept_b));
  }
  return kSuccess;
}

int do_estimate(const Globals& g, const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  const AnalysisOptions options = analysis_options(g, a.analyze);
  const CalibrationModel model = read_calibration(a.model);
  if (!drive_matches(model, {options.amplitude_v, options.frequency_hz, 0.0})) {
    fmt::print(err, "warning: model calibrated at {} V / {} Hz, recording driven at {} V / {} Hz\n",
               model.drive.amplitude_v, model.drive.frequency_hz, options.amplitude_v, options.frequency_hz);
  }
  const SampledSignal recording = read_wav(a.analyze.input);
  const AnalysisResult r = analyze(recording, options);
  warn_low_confidence(r, err);
  const double mass = estimate_mass(model, r.peak);
  if (g.format == OutputFormat::Human) {
    emit(g, out, fmt::format("estimated mass: {} g (peak {})\n", sig3(mass), sig3(r.peak)));
  } else {
    emit(g, out, fmt::format("mass_g={}\npeak={}\n", full(mass), full(r.peak)));
  }
  return kSuccess;
}

int do_demux(const Globals& g, const DemuxArgs& a, std::ostream& out) {
  require_positive(a.freq, "--freq");
  require_positive(g.cutoff_hz, "--cutoff-hz");
  const auto offsets = parse_list_flag(a.offsets, "--offsets");
  std::vector<PadChannel> pads;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (!(offsets[i] >= 0.0)) throw UsageError("--offsets must be non-negative");
    pads.push_back({static_cast<int>(i), {a.volts, a.freq, offsets[i]}});
  }
  const double window = g.window_s.value_or(default_window_s(a.freq));
  check_gates(pads, window);

  const SampledSignal clean = preprocess(read_wav(a.input), g.cutoff_hz, 1.0);
  const auto trains = demux_pulse_trains(clean, pads, window);
  std::string text;
  for (std::size_t i = 0; i < trains.size(); ++i) {
    const double peak = trains[i].pulses.empty() ? 0.0 : peak_statistic(trains[i]);
    if (g.format == OutputFormat::Human) {
      text += fmt::format("pad {}: peak {} ({} pulses)\n", pads[i].pad_id, sig3(peak), trains[i].pulses.size());
    } else {
      text += fmt::format("{},{},{}\n", pads[i].pad_id, full(peak), trains[i].pulses.size());
    }
  }
  emit(g, out, text);
  return kSuccess;
}

MonitorConfig load_monitor_config(const std::string& path) {
  MonitorConfig c;
  if (path.empty()) return c;
  const KeyValueFile kv = KeyValueFile::load(path);
  c.contact_on = kv.get_double("contact_on", c.contact_on);
  c.contact_off = kv.get_double("contact_off", 0.5 * c.contact_on);
  c.mass_change_rel = kv.get_double("mass_change_rel", c.mass_change_rel);
  const double confirm = kv.get_double("confirm_pulses", c.confirm_pulses);
  const double window = kv.get_double("median_window", c.median_window);
  if (confirm != std::floor(confirm) || window != std::floor(window)) {
    throw Error(Errc::ParseError, path + ": confirm_pulses and median_window must be whole numbers");
  }
  c.confirm_pulses = static_cast<int>(confirm);
  c.median_window = static_cast<int>(window);
  c.validate();
  return c;
}

int do_monitor(const Globals& g, const MonitorArgs& a, std::ostream& out, std::ostream& err) {
  AnalyzeArgs aa;
  aa.input = a.input;
  aa.freq = a.freq;
  aa.volts = a.volts;
  aa.phase = a.phase;
  const AnalysisOptions options = analysis_options(g, aa);
  const MonitorConfig config = load_monitor_config(a.config);
  const AnalysisResult r = analyze(read_wav(a.input), options);
  const auto events = run_monitor(r.train, config);
  if (events.empty()) fmt::print(err, "no events\n");
  if (g.format == OutputFormat::Human) {
    std::string text;
    for (const MonitorEvent& e : events) {
      text += fmt::format("{} t={} s peak {} -> {}\n", to_string(e.kind), sig3(e.time_s), sig3(e.peak_before),
                          sig3(e.peak_after));
    }
    emit(g, out, text);
  } else {
    emit(g, out, events_jsonl(events));
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Acoustic monitoring of electrostatic adhesion pads", "eamon"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::string format = "human";
  app.add_option("--sample-rate", g.sample_rate, "Sample rate for synthesized recordings (Hz)");
  app.add_option("--cutoff-hz", g.cutoff_hz, "High-pass cutoff (Hz)")->capture_default_str();
  app.add_option("--window-s", g.window_s, "Gate half-width around each pulse slot (s)");
  app.add_option("--seed", g.seed, "Noise seed for synthesized recordings");
  app.add_option("--output,-o", g.output, "Output file (default: standard output)");
  app.add_option("--format", format, "Output format: human, csv or lines")
      ->check(CLI::IsMember({"human", "csv", "lines"}))
      ->capture_default_str();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Synthesize a recording and its ground truth");
  simulate->add_option("--scenario", sim.scenario, "Key-value scenario file");
  simulate->add_option("--preset", sim.preset, "reference, two-pad or transport");
  simulate->add_option("--mass", sim.mass, "Adhered mass in g (comma list with --pads)");
  simulate->add_option("--area", sim.area, "Contact area (mm^2)")->capture_default_str();
  simulate->add_option("--volts", sim.volts, "Drive amplitude (V)")->capture_default_str();
  simulate->add_option("--freq", sim.freq, "Drive frequency (Hz)")->capture_default_str();
  simulate->add_option("--duration", sim.duration, "Recording length (s)")->capture_default_str();
  simulate->add_option("--phase", sim.phase, "Drive phase offset(s) (s, comma list with --pads)");
  simulate->add_option("--timeline", sim.timeline, "Timeline file: '<time_s> <event> [mass_g]' per line");
  simulate->add_option("--pads", sim.pads, "Number of pads sharing the microphone")->capture_default_str();
  simulate->add_option("--pad-gain", sim.pad_gain, "Per-pad microphone coupling (comma list)");
  simulate->add_option("--noise-rms", sim.noise_rms, "White noise RMS")->capture_default_str();
  simulate->add_option("--hum-amp", sim.hum_amp, "Hum amplitude")->capture_default_str();
  simulate->add_option("--snr-db", sim.snr_db, "Set white noise from an SNR against the clean signal");
  simulate->add_option("--wav-format", sim.wav_format, "float32 or pcm16")->capture_default_str();
  simulate->add_option("--truth", sim.truth, "Ground-truth JSON path (default: OUTPUT.truth.json)");

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Pulse count and peak pressure of a recording");
  analyze_cmd->add_option("input", an.input, "Mono WAV recording")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--freq", an.freq, "Drive frequency (Hz)")->required();
  analyze_cmd->add_option("--volts", an.volts, "Drive amplitude (V)")->capture_default_str();
  analyze_cmd->add_option("--phase", an.phase, "auto or first switch time (s)")->capture_default_str();
  analyze_cmd->add_option("--statistic", an.statistic, "median, mean or max")->capture_default_str();
  analyze_cmd->add_option("--csv", an.csv, "Also write the pulse train as CSV");
  analyze_cmd->add_option("--fullscale", an.fullscale, "Divide samples by this value")->capture_default_str();

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Fit P = a m + b from known masses");
  calibrate->add_option("--point", cal.points, "P,MASS (repeat)")->required();
  calibrate->add_option("--out", cal.out, "Model file to write");
  calibrate->add_option("--volts", cal.volts, "Drive amplitude of the calibration (V)")->capture_default_str();
  calibrate->add_option("--freq", cal.freq, "Drive frequency of the calibration (Hz)")->capture_default_str();

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate adhered mass from a recording");
  estimate->add_option("--model", est.model, "Calibration model file")->required()->check(CLI::ExistingFile);
  estimate->add_option("input", est.analyze.input, "Mono WAV recording")->required()->check(CLI::ExistingFile);
  estimate->add_option("--freq", est.analyze.freq, "Drive frequency (Hz)")->required();
  estimate->add_option("--volts", est.analyze.volts, "Drive amplitude (V)")->capture_default_str();
  estimate->add_option("--phase", est.analyze.phase, "auto or first switch time (s)")->capture_default_str();

  DemuxArgs dm;
  auto* demux = app.add_subcommand("demux", "Per-pad peaks of phase-shifted pads");
  demux->add_option("input", dm.input, "Mono WAV recording")->required()->check(CLI::ExistingFile);
  demux->add_option("--freq", dm.freq, "Shared drive frequency (Hz)")->required();
  demux->add_option("--offsets", dm.offsets, "Comma list of per-pad phase offsets (s)")->required();
  demux->add_option("--volts", dm.volts, "Drive amplitude (V)")->capture_default_str();

  MonitorArgs mon;
  auto* monitor = app.add_subcommand("monitor", "Contact, mass-change and detachment events");
  monitor->add_option("input", mon.input, "Mono WAV recording")->required()->check(CLI::ExistingFile);
  monitor->add_option("--freq", mon.freq, "Drive frequency (Hz)")->required();
  monitor->add_option("--volts", mon.volts, "Drive amplitude (V)")->capture_default_str();
  monitor->add_option("--phase", mon.phase, "auto or first switch time (s)")->capture_default_str();
  monitor->add_option("--config", mon.config, "Key-value monitor thresholds")->check(CLI::ExistingFile);

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }
  g.format = format == "csv" ? OutputFormat::Csv : (format == "lines" ? OutputFormat::Lines : OutputFormat::Human);

  try {
    if (simulate->parsed()) return do_simulate(g, sim, out, err);
    if (analyze_cmd->parsed()) return do_analyze(g, an, out, err);
    if (calibrate->parsed()) return do_calibrate(g, cal, out);
    if (estimate->parsed()) return do_estimate(g, est, out, err);
    if (demux->parsed()) return do_demux(g, dm, out);
    if (monitor->parsed()) return do_monitor(g, mon, out, err);
  } catch (const UsageError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kUsage;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return is_input_error(e.code()) ? kInputFormat : kPrecondition;
  }
  return kUsage;
}

}  // namespace eamon::cli
