#pragma once

#include <deque>
#include <string_view>
#include <vector>

#include "eamon/pulse.hpp"

namespace eamon {

/// Thresholds for the adhesion state machine. contact_on/contact_off are absolute
/// normalized pressures; mass_change_rel is relative to the holding baseline.
struct MonitorConfig {
  double contact_on = 0.02;
  double contact_off = 0.01;
  int confirm_pulses = 3;
  double mass_change_rel = 0.10;
  int median_window = 5;

  /// Throws InvalidArgument on broken invariants (hysteresis, counts, ranges).
  void validate() const;
};

enum class MonitorPhase { Idle, Contacted, Holding, Released };

enum class EventKind { ContactDetected, MassIncreased, MassDecreased, Detached };

std::string_view to_string(MonitorPhase phase) noexcept;
std::string_view to_string(EventKind kind) noexcept;
EventKind event_kind_from_string(std::string_view name);

struct MonitorEvent {
  EventKind kind = EventKind::ContactDetected;
  double time_s = 0.0;
  double peak_before = 0.0;
  double peak_after = 0.0;

  friend bool operator==(const MonitorEvent&, const MonitorEvent&) = default;
};

/// Everything the state machine carries between pulses. Plain value; copy freely.
struct MonitorState {
  MonitorPhase phase = MonitorPhase::Idle;
  double baseline_peak = 0.0;  ///< moving median outside excursions, frozen during one
  long pulses_seen = 0;

  std::deque<Pulse> recent;    ///< last median_window pulses
  double last_time_s = 0.0;
  long pulses_in_contact = 0;

  // Run of pulses above contact_on (while not attached).
  std::vector<Pulse> above_run;
  // Run of pulses below contact_off (while attached).
  std::vector<Pulse> below_run;
  // Sustained departure of the moving median from the baseline (+1 up, -1 down).
  int deviation_dir = 0;
  int deviation_count = 0;
  double deviation_start_s = 0.0;

  friend bool operator==(const MonitorState&, const MonitorState&) = default;
};

struct StepResult {
  MonitorState state;
  std::vector<MonitorEvent> events;
};

/// One pulse through the state machine.
///
/// Idle/Released -> Contacted after confirm_pulses consecutive peaks above contact_on.
/// Contacted -> Holding once median_window pulses have arrived since the contact onset.
/// Holding emits MassIncreased/MassDecreased when the moving median stays outside
/// baseline * (1 +/- mass_change_rel) for confirm_pulses pulses, then rebases.
/// Contacted/Holding -> Released after confirm_pulses consecutive peaks below contact_off.
///
/// Event times are onsets: the first pulse of the confirming run, or for mass changes the
/// earliest pulse from which every raw peak sits beyond the band.
/// Throws OutOfOrderPulse when time does not strictly increase.
StepResult step(const MonitorState& state, const Pulse& pulse, const MonitorConfig& config);

/// Folds step over the train from the initial Idle state.
std::vector<MonitorEvent> run_monitor(const PulseTrain& train, const MonitorConfig& config);

}  // namespace eamon
