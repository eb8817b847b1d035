#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eamon/demux.hpp"
#include "eamon/pulse.hpp"
#include "eamon/signal.hpp"

namespace eamon {

struct ObjectSpec {
  double mass_g = 15.0;
  double contact_area_mm2 = 2500.0;
};

/// Phenomenological peak-pressure model, separable in each parameter:
///   A = (a m + b) (V / v_ref) (1 + c_S (S / s_ref - 1)) (1 + c_f log10(f / f_ref))
/// Linear in mass and voltage, increasing in area, logarithmic in drive frequency. The
/// defaults put A(m) = 0.0016 m + 0.044 at 600 V, 50x50 mm and 5 Hz. The area and
/// frequency coefficients are free parameters, not measured values.
struct AmplitudeModel {
  double slope_a = 0.0016;
  double intercept_b = 0.044;
  double v_ref = 600.0;
  double area_gain_coeff = 0.4;
  double s_ref = 2500.0;
  double freq_gain_coeff = 0.15;
  double f_ref = 5.0;
};

/// Tested parameter box: 300-700 V, 10-30 g, 900-2500 mm^2, 1-1000 Hz.
struct ValidityBox {
  double volts_min = 300.0, volts_max = 700.0;
  double mass_min = 10.0, mass_max = 30.0;
  double area_min = 900.0, area_max = 2500.0;
  double freq_min = 1.0, freq_max = 1000.0;
};

bool in_validity_box(const ObjectSpec& object, const DriveConfig& drive, const ValidityBox& box = {});

/// Throws NonPositiveAmplitude when some corner of the box (and therefore, since each factor
/// is monotone, some interior point) gives A <= 0.
void validate_model(const AmplitudeModel& model, const ValidityBox& box = {});

/// Throws NonPositiveAmplitude when the result is not positive.
double peak_amplitude(const AmplitudeModel& model, const ObjectSpec& object, const DriveConfig& drive);

enum class TimelineKind { PowerOn, Contact, MassSet, PowerOff };

std::string_view to_string(TimelineKind kind) noexcept;

struct TimelineEvent {
  double time_s = 0.0;
  TimelineKind kind = TimelineKind::PowerOn;
  double mass_g = 0.0;  ///< MassSet only

  friend bool operator==(const TimelineEvent&, const TimelineEvent&) = default;
};

struct ScenarioSpec {
  DriveConfig drive;
  ObjectSpec object;
  AmplitudeModel model;
  double duration_s = 2.0;
  double sample_rate_hz = 44100.0;
  double pulse_carrier_hz = 3000.0;
  double pulse_decay_s = 0.005;
  double noise_white_rms = 0.0;
  double noise_hum_amp = 0.0;
  double hum_hz = 100.0;
  /// nullopt: powered and adhered for the whole recording, no collision transient.
  /// A value (possibly empty): starts unpowered and detached, then follows the events.
  std::optional<std::vector<TimelineEvent>> timeline;
  std::uint64_t seed = 0;
  /// Pulses are scaled so their peak after this high-pass equals the model amplitude.
  double reference_cutoff_hz = 1000.0;
  double gain = 1.0;  ///< per-pad coupling to the microphone
};

/// Collision transient at a Contact event, relative to the steady pulse amplitude.
inline constexpr double kCollisionFactor = 3.0;

struct InjectedPulse {
  double time_s = 0.0;
  double amplitude = 0.0;
  int pad_id = 0;
  bool collision = false;
};

struct GroundTruth {
  std::vector<InjectedPulse> pulses;
  std::vector<TimelineEvent> timeline;
};

struct Synthesis {
  SampledSignal signal;
  GroundTruth truth;
};

/// Ringing time constant actually used: the configured decay, capped at an eighth of the
/// switch spacing so that consecutive pulses do not pile up at high drive frequencies.
double effective_decay_s(const ScenarioSpec& scenario);

/// Throws InvalidScenario.
void validate_scenario(const ScenarioSpec& scenario);

/// Exponentially damped (cosine-phase) carrier bursts at each polarity switch while the pad
/// is powered and adhered, plus seeded white noise and mains-like hum.
Synthesis synthesize(const ScenarioSpec& scenario);

struct PadSource {
  PadChannel channel;
  ObjectSpec object;
  double gain = 1.0;
};

struct MultiSynthesis {
  SampledSignal signal;
  std::vector<GroundTruth> per_pad;  ///< in the order of the pads argument
};

/// Superposition of one synthesize() per pad with a single shared noise realization. The
/// shared scenario supplies everything except drive phase, object and gain. MassSet events
/// are rejected (ambiguous across pads). Throws OverlappingGates for pads closer than the
/// default gates allow.
MultiSynthesis synthesize_multi(std::span<const PadSource> pads, const ScenarioSpec& shared);

/// White-noise RMS giving the requested SNR against the clean (noise-free) scenario signal,
/// SNR = 20 log10(rms(clean) / rms(noise)).
double noise_rms_for_snr(const ScenarioSpec& scenario, double snr_db);

// Presets used by the CLI, the tests and the acceptance suite.
ScenarioSpec reference_scenario(double mass_g = 15.0, double duration_s = 2.0);
/// Two platforms at +/-600 V, 5 Hz, quarter period apart, 25 g and 15 g, with per-pad
/// coupling gains that put their peaks at 0.056 and 0.037.
std::vector<PadSource> two_pad_sources();
/// End-effector transport: idle until contact at 1 s with a 20 g tray, +10 g at 3 s,
/// power off at 5 s, 6 s recording with light background noise.
ScenarioSpec transport_scenario();

/// Loads a key-value scenario description; `event = <time> <kind> [mass]` lines form the
/// timeline. Returns the pads when the file describes more than one (`pads = N`).
struct ScenarioFile {
  ScenarioSpec scenario;
  std::vector<PadSource> pads;  ///< empty for a single-pad scenario
};
ScenarioFile load_scenario(const std::filesystem::path& path);
ScenarioFile parse_scenario(std::string_view text, const std::string& origin = "<text>");
std::vector<TimelineEvent> parse_timeline(std::string_view text, const std::string& origin = "<text>");

}  // namespace eamon
