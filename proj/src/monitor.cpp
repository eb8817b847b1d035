#include "eamon/monitor.hpp"

#include <cmath>
#include <string>

#include "eamon/error.hpp"

namespace eamon {

namespace {

double median_peak(const auto& pulses) {
  std::vector<double> peaks;
  peaks.reserve(pulses.size());
  for (const Pulse& p : pulses) peaks.push_back(p.peak);
  return median(std::move(peaks));
}

void reset_deviation(MonitorState& s) {
  s.deviation_dir = 0;
  s.deviation_count = 0;
  s.deviation_start_s = 0.0;
}

// Returns true when the detachment run completed (state already moved to Released).
bool track_detach(MonitorState& s, const Pulse& pulse, const MonitorConfig& config,
                  std::vector<MonitorEvent>& events) {
  if (pulse.peak < config.contact_off) {
    s.below_run.push_back(pulse);
  } else {
    s.below_run.clear();
  }
  if (static_cast<int>(s.below_run.size()) < config.confirm_pulses) return false;

  const double after = median_peak(s.below_run);
  events.push_back({EventKind::Detached, s.below_run.front().time_s, s.baseline_peak, after});
  s.phase = MonitorPhase::Released;
  s.baseline_peak = after;
  s.below_run.clear();
  s.above_run.clear();
  s.pulses_in_contact = 0;
  reset_deviation(s);
  return true;
}

}  // namespace

void MonitorConfig::validate() const {
  if (!(contact_on > 0.0)) throw Error(Errc::InvalidArgument, "contact_on must be positive");
  if (!(contact_off >= 0.0 && contact_off < contact_on)) {
    throw Error(Errc::InvalidArgument, "contact_off must lie in [0, contact_on)");
  }
  if (confirm_pulses < 1) throw Error(Errc::InvalidArgument, "confirm_pulses must be >= 1");
  if (!(mass_change_rel > 0.0 && mass_change_rel < 1.0)) {
    throw Error(Errc::InvalidArgument, "mass_change_rel must lie in (0, 1)");
  }
  if (median_window < 1) throw Error(Errc::InvalidArgument, "median_window must be >= 1");
}

std::string_view to_string(MonitorPhase phase) noexcept {
  switch (phase) {
    case MonitorPhase::Idle: return "Idle";
    case MonitorPhase::Contacted: return "Contacted";
    case MonitorPhase::Holding: return "Holding";
    case MonitorPhase::Released: return "Released";
  }
  return "Unknown";
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::ContactDetected: return "ContactDetected";
    case EventKind::MassIncreased: return "MassIncreased";
    case EventKind::MassDecreased: return "MassDecreased";
    case EventKind::Detached: return "Detached";
  }
  return "Unknown";
}

EventKind event_kind_from_string(std::string_view name) {
  for (EventKind k : {EventKind::ContactDetected, EventKind::MassIncreased, EventKind::MassDecreased,
                      EventKind::Detached}) {
    if (to_string(k) == name) return k;
  }
  throw Error(Errc::ParseError, "unknown event kind '" + std::string(name) + "'");
}

StepResult step(const MonitorState& state, const Pulse& pulse, const MonitorConfig& config) {
  config.validate();
  if (!std::isfinite(pulse.peak) || pulse.peak < 0.0 || !std::isfinite(pulse.time_s)) {
    throw Error(Errc::InvalidArgument, "pulse peak must be a finite magnitude");
  }
  if (state.pulses_seen > 0 && !(pulse.time_s > state.last_time_s)) {
    throw Error(Errc::OutOfOrderPulse, "pulse at " + std::to_string(pulse.time_s) + " s arrived after " +
                                           std::to_string(state.last_time_s) + " s");
  }

  StepResult result{state, {}};
  MonitorState& s = result.state;
  auto& events = result.events;
  ++s.pulses_seen;
  s.last_time_s = pulse.time_s;
  s.recent.push_back(pulse);
  while (static_cast<int>(s.recent.size()) > config.median_window) s.recent.pop_front();

  switch (s.phase) {
    case MonitorPhase::Idle:
    case MonitorPhase::Released: {
      if (pulse.peak > config.contact_on) {
        s.above_run.push_back(pulse);
      } else {
        s.above_run.clear();
        s.baseline_peak = median_peak(s.recent);
      }
      if (static_cast<int>(s.above_run.size()) >= config.confirm_pulses) {
        events.push_back(
            {EventKind::ContactDetected, s.above_run.front().time_s, s.baseline_peak, median_peak(s.above_run)});
        s.phase = MonitorPhase::Contacted;
        s.pulses_in_contact = static_cast<long>(s.above_run.size());
        s.above_run.clear();
        s.below_run.clear();
        reset_deviation(s);
      }
      break;
    }

    case MonitorPhase::Contacted: {
      ++s.pulses_in_contact;
      if (track_detach(s, pulse, config, events)) break;
      s.baseline_peak = median_peak(s.recent);
      if (s.below_run.empty() && s.pulses_in_contact >= config.median_window) s.phase = MonitorPhase::Holding;
      break;
    }

    case MonitorPhase::Holding: {
      ++s.pulses_in_contact;
      if (track_detach(s, pulse, config, events)) break;
      if (!s.below_run.empty()) {
        // Possibly detaching; a collapsing median is not a mass change.
        reset_deviation(s);
        break;
      }
      const double med = median_peak(s.recent);
      const double upper = s.baseline_peak * (1.0 + config.mass_change_rel);
      const double lower = s.baseline_peak * (1.0 - config.mass_change_rel);
      const int dir = med > upper ? 1 : (med < lower ? -1 : 0);
      if (dir == 0) {
        s.baseline_peak = med;
        reset_deviation(s);
        break;
      }
      if (dir != s.deviation_dir) {
        s.deviation_dir = dir;
        s.deviation_count = 1;
        s.deviation_start_s = pulse.time_s;
      } else {
        ++s.deviation_count;
      }
      if (s.deviation_count < config.confirm_pulses) break;

      auto beyond = [&](double peak) { return dir > 0 ? peak > upper : peak < lower; };
      double onset = s.deviation_start_s;
      if (beyond(s.recent.back().peak)) {
        for (auto it = s.recent.rbegin(); it != s.recent.rend() && beyond(it->peak); ++it) onset = it->time_s;
      }
      events.push_back({dir > 0 ? EventKind::MassIncreased : EventKind::MassDecreased, onset, s.baseline_peak, med});
      s.baseline_peak = med;
      reset_deviation(s);
      break;
    }
  }
  return result;
}

std::vector<MonitorEvent> run_monitor(const PulseTrain& train, const MonitorConfig& config) {
  MonitorState state;
  std::vector<MonitorEvent> events;
  for (const Pulse& pulse : train.pulses) {
    StepResult r = step(state, pulse, config);
    state = std::move(r.state);
    events.insert(events.end(), r.events.begin(), r.events.end());
  }
  return events;
}

}  // namespace eamon
