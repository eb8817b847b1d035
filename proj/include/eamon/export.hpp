#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "eamon/monitor.hpp"
#include "eamon/pulse.hpp"
#include "eamon/simulator.hpp"

namespace eamon {

/// `time_s,peak` header then one row per pulse, 9 significant digits, trailing newline.
std::string pulse_csv(const PulseTrain& train);
void export_pulse_csv(const PulseTrain& train, const std::filesystem::path& path);
std::vector<Pulse> parse_pulse_csv(std::string_view text);

/// One JSON object per line: kind, time_s, peak_before, peak_after.
std::string event_line(const MonitorEvent& event);
std::string events_jsonl(const std::vector<MonitorEvent>& events);
void export_events_jsonl(const std::vector<MonitorEvent>& events, const std::filesystem::path& path);
std::vector<MonitorEvent> parse_events_jsonl(std::string_view text);

/// Ground truth of a synthesized recording as a JSON document (pulses per pad, timeline).
std::string ground_truth_json(const std::vector<GroundTruth>& pads);
void export_ground_truth(const std::vector<GroundTruth>& pads, const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace eamon
