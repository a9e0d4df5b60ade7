#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hybridqc/device.hpp"
#include "hybridqc/pulses.hpp"

namespace hybridqc {

inline constexpr int config_format_version = 1;

struct ConfigField {
  std::string key;
  std::string value;
};

// One "kind label: key value, key value" line.
struct ConfigEntry {
  std::string kind;
  std::string label;
  std::vector<ConfigField> fields;
  int line = 0;

  const ConfigField* find(std::string_view key) const;
};

// One "key = value" line.
struct ConfigSetting {
  std::string key;
  std::string value;
  int line = 0;
};

struct ConfigSection {
  std::string name;  // empty for the leading header block
  int line = 0;
  std::vector<ConfigSetting> settings;
  std::vector<ConfigEntry> entries;

  const ConfigSetting* setting(std::string_view key) const;
};

class ConfigDocument {
 public:
  static ConfigDocument parse(std::string_view text);

  const ConfigSection* section(std::string_view name) const;
  ConfigSection& section_or_add(std::string_view name);
  const std::vector<ConfigSection>& sections() const { return sections_; }

  // "section.label.key=value", "section.key=value" or "key=value" (header).
  // A bare number inherits the unit of the value it replaces.
  void apply_override(std::string_view assignment);

  std::string render() const;

 private:
  std::vector<ConfigSection> sections_;
};

DeviceSpec device_from_document(const ConfigDocument& doc);
// Throws ConfigError when the document has no [schedule] section.
PulseSchedule schedule_from_document(const ConfigDocument& doc, const DeviceSpec& device);

DeviceSpec load_device(std::string_view text);
std::string serialize_device(const DeviceSpec& device);

PulseSchedule load_schedule(std::string_view text, const DeviceSpec& device);
std::string serialize_schedule(const PulseSchedule& schedule);

// Quantities with a required unit, returned in internal units.
double parse_frequency(std::string_view text, int line = 0, std::string_view field = {});
double parse_time(std::string_view text, int line = 0, std::string_view field = {});
double parse_number(std::string_view text, int line = 0, std::string_view field = {});
// Accepts numbers and multiples or fractions of pi such as "pi/2", "3pi/4", "0.25*pi".
double parse_angle(std::string_view text, int line = 0, std::string_view field = {});

// Shortest text that reads back to the same double.
std::string format_number(double value);

}  // namespace hybridqc
