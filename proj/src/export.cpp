#include "eamon/export.hpp"

#include <fmt/format.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "eamon/error.hpp"
#include "eamon/keyvalue.hpp"

namespace eamon {

using nlohmann::json;

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::IoFailure, "write to " + path.string() + " failed");
}

std::string pulse_csv(const PulseTrain& train) {
  std::string out = "time_s,peak\n";
  for (const Pulse& p : train.pulses) out += fmt::format("{:.9g},{:.9g}\n", p.time_s, p.peak);
  return out;
}

void export_pulse_csv(const PulseTrain& train, const std::filesystem::path& path) {
  write_text_file(path, pulse_csv(train));
}

std::vector<Pulse> parse_pulse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "time_s,peak") {
    throw Error(Errc::ParseError, "pulse CSV must start with 'time_s,peak'");
  }
  std::vector<Pulse> pulses;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(Errc::ParseError, "pulse CSV row without a comma: " + line);
    pulses.push_back({parse_double(std::string_view(line).substr(0, comma), "time_s"),
                      parse_double(std::string_view(line).substr(comma + 1), "peak")});
  }
  return pulses;
}

std::string event_line(const MonitorEvent& e) {
  const json j = {{"kind", std::string(to_string(e.kind))},
                  {"time_s", e.time_s},
                  {"peak_before", e.peak_before},
                  {"peak_after", e.peak_after}};
  return j.dump();
}

std::string events_jsonl(const std::vector<MonitorEvent>& events) {
  std::string out;
  for (const MonitorEvent& e : events) out += event_line(e) + "\n";
  return out;
}

void export_events_jsonl(const std::vector<MonitorEvent>& events, const std::filesystem::path& path) {
  write_text_file(path, events_jsonl(events));
}

std::vector<MonitorEvent> parse_events_jsonl(std::string_view text) {
  std::vector<MonitorEvent> events;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      events.push_back({event_kind_from_string(j.at("kind").get<std::string>()), j.at("time_s").get<double>(),
                        j.at("peak_before").get<double>(), j.at("peak_after").get<double>()});
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, std::string("bad event record: ") + e.what());
    }
  }
  return events;
}

std::string ground_truth_json(const std::vector<GroundTruth>& pads) {
  json doc = json::object();
  doc["pads"] = json::array();
  for (const GroundTruth& truth : pads) {
    json pad = {{"pulses", json::array()}, {"timeline", json::array()}};
    for (const InjectedPulse& p : truth.pulses) {
      pad["pulses"].push_back(
          {{"time_s", p.time_s}, {"amplitude", p.amplitude}, {"pad_id", p.pad_id}, {"collision", p.collision}});
    }
    for (const TimelineEvent& e : truth.timeline) {
      json ev = {{"time_s", e.time_s}, {"event", std::string(to_string(e.kind))}};
      if (e.kind == TimelineKind::MassSet) ev["mass_g"] = e.mass_g;
      pad["timeline"].push_back(std::move(ev));
    }
    doc["pads"].push_back(std::move(pad));
  }
  return doc.dump(2) + "\n";
}

void export_ground_truth(const std::vector<GroundTruth>& pads, const std::filesystem::path& path) {
  write_text_file(path, ground_truth_json(pads));
}

}  // namespace eamon
