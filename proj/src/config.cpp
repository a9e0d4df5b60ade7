#include "hybridqc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "hybridqc/errors.hpp"
#include "hybridqc/units.hpp"

namespace hybridqc {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool valid_label(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '\'' || c == '_'; });
}

const std::set<std::string> kSections{"modes", "spins", "cpb", "hops", "loss", "schedule", "scenario"};

std::pair<double, std::string> number_and_unit(std::string_view text, int line, std::string_view field) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr == begin) throw ConfigError(line, std::string(field), "expected a number, got '" + t + "'");
  return {value, trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)))};
}

}  // namespace

double parse_number(std::string_view text, int line, std::string_view field) {
  auto [v, unit] = number_and_unit(text, line, field);
  if (!unit.empty()) throw ConfigError(line, std::string(field), "unexpected unit '" + unit + "'");
  if (!std::isfinite(v)) throw ConfigError(line, std::string(field), "value must be finite");
  return v;
}

double parse_frequency(std::string_view text, int line, std::string_view field) {
  auto [v, unit] = number_and_unit(text, line, field);
  const std::string u = lower(unit);
  if (!std::isfinite(v)) throw ConfigError(line, std::string(field), "value must be finite");
  if (u == "ghz") return units::ghz(v);
  if (u == "mhz") return units::mhz(v);
  if (u == "khz") return units::khz(v);
  if (u == "hz") return units::khz(v * 1e-3);
  if (u.empty()) throw ConfigError(line, std::string(field), "frequency needs a unit (GHz, MHz, kHz or Hz)");
  throw ConfigError(line, std::string(field), "unknown frequency unit '" + unit + "'");
}

double parse_time(std::string_view text, int line, std::string_view field) {
  auto [v, unit] = number_and_unit(text, line, field);
  const std::string u = lower(unit);
  if (!std::isfinite(v)) throw ConfigError(line, std::string(field), "value must be finite");
  if (u == "ns") return v;
  if (u == "ps") return v * 1e-3;
  if (u == "us") return v * 1e3;
  if (u.empty()) throw ConfigError(line, std::string(field), "time needs a unit (ns, ps or us)");
  throw ConfigError(line, std::string(field), "unknown time unit '" + unit + "'");
}

double parse_angle(std::string_view text, int line, std::string_view field) {
  std::string t = lower(trim(text));
  t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
  const auto p = t.find("pi");
  if (p == std::string::npos) return parse_number(t, line, field);
  std::string head = t.substr(0, p), tail = t.substr(p + 2);
  if (!head.empty() && head.back() == '*') head.pop_back();
  double factor = head.empty() ? 1.0 : (head == "-" ? -1.0 : parse_number(head, line, field));
  if (!tail.empty()) {
    if (tail.front() != '/') throw ConfigError(line, std::string(field), "bad angle '" + std::string(text) + "'");
    const double den = parse_number(tail.substr(1), line, field);
    if (den == 0.0) throw ConfigError(line, std::string(field), "division by zero in angle");
    factor /= den;
  }
  return factor * units::pi;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

const ConfigField* ConfigEntry::find(std::string_view key) const {
  for (const auto& f : fields)
    if (f.key == key) return &f;
  return nullptr;
}

const ConfigSetting* ConfigSection::setting(std::string_view key) const {
  for (const auto& s : settings)
    if (s.key == key) return &s;
  return nullptr;
}

ConfigDocument ConfigDocument::parse(std::string_view text) {
  ConfigDocument doc;
  doc.sections_.push_back({"", 0, {}, {}});
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    ConfigSection& current = doc.sections_.back();
    if (content.front() == '[') {
      if (content.back() != ']') throw ConfigError(line, "", "malformed section header");
      const std::string name = trim(std::string_view(content).substr(1, content.size() - 2));
      if (!kSections.count(name)) throw ConfigError(line, name, "unknown section");
      if (doc.section(name)) throw ConfigError(line, name, "section appears twice");
      doc.sections_.push_back({name, line, {}, {}});
      continue;
    }
    const auto eq = content.find('='), colon = content.find(':');
    if (eq != std::string::npos && (colon == std::string::npos || eq < colon)) {
      const std::string key = trim(std::string_view(content).substr(0, eq));
      if (key.empty()) throw ConfigError(line, "", "missing key before '='");
      if (current.setting(key)) throw ConfigError(line, key, "key given twice");
      current.settings.push_back({key, trim(std::string_view(content).substr(eq + 1)), line});
      continue;
    }
    if (colon == std::string::npos) throw ConfigError(line, "", "expected 'key = value' or 'kind label: fields'");
    std::istringstream head(content.substr(0, colon));
    ConfigEntry entry;
    entry.line = line;
    std::string extra;
    if (!(head >> entry.kind >> entry.label) || (head >> extra))
      throw ConfigError(line, "", "entry must start with a kind and a label");
    for (const auto& part : split(std::string_view(content).substr(colon + 1), ',')) {
      if (part.empty()) throw ConfigError(line, "", "empty field");
      const auto space = part.find_first_of(" \t");
      ConfigField f{part.substr(0, space), space == std::string::npos ? "" : trim(part.substr(space))};
      if (f.value.empty()) throw ConfigError(line, f.key, "field has no value");
      if (entry.find(f.key)) throw ConfigError(line, f.key, "field given twice");
      entry.fields.push_back(std::move(f));
    }
    current.entries.push_back(std::move(entry));
  }
  return doc;
}

const ConfigSection* ConfigDocument::section(std::string_view name) const {
  for (const auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

ConfigSection& ConfigDocument::section_or_add(std::string_view name) {
  for (auto& s : sections_)
    if (s.name == name) return s;
  sections_.push_back({std::string(name), 0, {}, {}});
  return sections_.back();
}

namespace {

const std::map<std::string, std::string> kAliases{{"Gbar", "coupling"}, {"kappa", "rate"}, {"gamma", "rate"},
                                                  {"G0", "lower"},      {"G1", "upper"}};

std::string with_unit(const std::string& old_value, const std::string& new_value, const std::string& path) {
  const std::string nv = trim(new_value);
  auto unit_of = [](const std::string& v) -> std::optional<std::string> {
    double x = 0.0;
    const char* b = v.data();
    const char* e = v.data() + v.size();
    if (b != e && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, x);
    if (ec != std::errc() || ptr == b) return std::nullopt;
    return trim(std::string_view(ptr, static_cast<std::size_t>(e - ptr)));
  };
  const auto old_unit = unit_of(old_value);
  const auto new_unit = unit_of(nv);
  if (old_unit && !new_unit) throw ValidationError("override type mismatch for '" + path + "': expected a number");
  if (old_unit && new_unit && new_unit->empty() && !old_unit->empty()) return nv + " " + *old_unit;
  return nv;
}

}  // namespace

void ConfigDocument::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ValidationError("override must look like path=value");
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  std::vector<std::string> parts = split(path, '.');
  for (const auto& p : parts)
    if (p.empty()) throw ValidationError("malformed override path '" + path + "'");
  if (parts.size() == 1) parts.insert(parts.begin(), "");
  if (parts.size() > 3) throw ValidationError("malformed override path '" + path + "'");
  ConfigSection* target = nullptr;
  for (auto& s : sections_)
    if (s.name == parts[0]) target = &s;
  if (!target) throw ValidationError("override references missing section '" + parts[0] + "'");
  if (parts.size() == 2) {
    for (auto& s : target->settings)
      if (s.key == parts[1]) {
        s.value = with_unit(s.value, value, path);
        return;
      }
    throw ValidationError("override references unknown key '" + path + "'");
  }
  std::string key = parts[2];
  if (auto a = kAliases.find(key); a != kAliases.end()) key = a->second;
  ConfigField* found = nullptr;
  int matches = 0;
  for (auto& e : target->entries)
    if (e.label == parts[1])
      for (auto& f : e.fields)
        if (f.key == key) {
          found = &f;
          ++matches;
        }
  if (matches == 0) throw ValidationError("override references unknown key '" + path + "'");
  if (matches > 1) throw ValidationError("override path '" + path + "' is ambiguous");
  found->value = with_unit(found->value, value, path);
}

std::string ConfigDocument::render() const {
  std::ostringstream out;
  for (const auto& s : sections_) {
    if (!s.name.empty()) out << "\n[" << s.name << "]\n";
    for (const auto& kv : s.settings) out << kv.key << " = " << kv.value << "\n";
    for (const auto& e : s.entries) {
      out << e.kind << " " << e.label << ":";
      for (std::size_t i = 0; i < e.fields.size(); ++i)
        out << (i ? ", " : " ") << e.fields[i].key << " " << e.fields[i].value;
      out << "\n";
    }
  }
  return out.str();
}

namespace {

// Field reader that rejects anything it was not asked about.
class FieldReader {
 public:
  explicit FieldReader(const ConfigEntry& e) : e_(e) {}
  const ConfigField* take(std::string_view key) {
    used_.insert(std::string(key));
    return e_.find(key);
  }
  const ConfigField& need(std::string_view key) {
    const ConfigField* f = take(key);
    if (!f) throw ConfigError(e_.line, std::string(key), "missing required field");
    return *f;
  }
  double frequency(std::string_view key) { return parse_frequency(need(key).value, e_.line, key); }
  double time(std::string_view key) { return parse_time(need(key).value, e_.line, key); }
  double number(std::string_view key) { return parse_number(need(key).value, e_.line, key); }
  int integer(std::string_view key) {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(e_.line, std::string(key), "expected an integer");
    return static_cast<int>(v);
  }
  void finish() const {
    for (const auto& f : e_.fields)
      if (!used_.count(f.key)) throw ConfigError(e_.line, f.key, "unknown key");
  }

 private:
  const ConfigEntry& e_;
  std::set<std::string> used_;
};

void expect_kind(const ConfigEntry& e, std::initializer_list<const char*> kinds, const std::string& section) {
  for (const char* k : kinds)
    if (e.kind == k) return;
  throw ConfigError(e.line, e.kind, "unknown entry kind in [" + section + "]");
}

void no_settings(const ConfigSection& s) {
  if (!s.settings.empty()) throw ConfigError(s.settings.front().line, s.settings.front().key, "unknown key");
}

void check_label(const ConfigEntry& e) {
  if (!valid_label(e.label)) throw ConfigError(e.line, e.label, "labels use letters, digits, apostrophes and underscores");
}

}  // namespace

DeviceSpec device_from_document(const ConfigDocument& doc) {
  DeviceSpec d;
  const ConfigSection& header = *doc.section("");
  if (!header.entries.empty()) throw ConfigError(header.entries.front().line, header.entries.front().kind, "entry outside any section");
  for (const auto& s : header.settings) {
    if (s.key == "format_version") {
      const double v = parse_number(s.value, s.line, s.key);
      if (v != config_format_version)
        throw ConfigError(s.line, s.key, "unsupported format version " + s.value);
    } else if (s.key == "name") {
      d.name = s.value;
    } else if (s.key == "description") {
      d.description = s.value;
    } else {
      throw ConfigError(s.line, s.key, "unknown key");
    }
  }

  const ConfigSection* modes = doc.section("modes");
  if (!modes || modes->entries.empty()) throw ConfigError(modes ? modes->line : 0, "modes", "no modes defined");
  no_settings(*modes);
  for (const auto& e : modes->entries) {
    expect_kind(e, {"mode"}, "modes");
    check_label(e);
    FieldReader r(e);
    ModeSpec m;
    m.label = e.label;
    m.fundamental = r.frequency("fundamental");
    m.harmonic = r.integer("harmonic");
    if (r.take("range")) m.tuning_range = r.number("range");
    r.finish();
    d.modes.push_back(m);
  }

  if (const ConfigSection* spins = doc.section("spins")) {
    no_settings(*spins);
    for (const auto& e : spins->entries) {
      expect_kind(e, {"spin"}, "spins");
      check_label(e);
      FieldReader r(e);
      SpinEnsembleSpec s;
      s.label = e.label;
      s.gap = r.frequency("gap");
      s.coupling = r.frequency("coupling");
      s.mode = r.need("mode").value;
      if (r.take("count")) s.spin_count = r.number("count");
      if (r.take("single")) s.single_spin_coupling = r.frequency("single");
      r.finish();
      d.spins.push_back(s);
    }
  }

  if (const ConfigSection* cpb = doc.section("cpb")) {
    no_settings(*cpb);
    CpbSpec b;
    bool have_box = false;
    for (const auto& e : cpb->entries) {
      expect_kind(e, {"cpb", "coupling"}, "cpb");
      check_label(e);
      FieldReader r(e);
      if (e.kind == "cpb") {
        if (have_box) throw ConfigError(e.line, e.label, "only one box is supported");
        have_box = true;
        b.label = e.label;
        const bool direct = e.find("gap01") || e.find("gap12");
        const bool raw = e.find("ec") || e.find("ej") || e.find("ng") || e.find("nmax");
        if (direct == raw) throw ConfigError(e.line, e.label, "give either gap01/gap12 or ec/ej/ng[/nmax]");
        if (direct) {
          b.gap01 = r.frequency("gap01");
          b.gap12 = r.frequency("gap12");
        } else {
          CpbChargeModel cm;
          cm.charging_energy = r.frequency("ec");
          cm.josephson_energy = r.frequency("ej");
          cm.gate_charge = r.number("ng");
          if (r.take("nmax")) cm.charge_cutoff = r.integer("nmax");
          const CpbLevels levels = cpb_spectrum(cm.charging_energy, cm.josephson_energy, cm.gate_charge, cm.charge_cutoff);
          b.gap01 = levels.gap01;
          b.gap12 = levels.gap12;
          b.charge_model = cm;
        }
      } else {
        CpbCoupling c;
        c.mode = e.label;
        c.lower = r.frequency("lower");
        c.upper = r.frequency("upper");
        b.couplings.push_back(c);
      }
      r.finish();
    }
    if (!have_box) throw ConfigError(cpb->line, "cpb", "section [cpb] needs a 'cpb' entry");
    d.cpb = b;
  }

  if (const ConfigSection* hops = doc.section("hops")) {
    no_settings(*hops);
    for (const auto& e : hops->entries) {
      expect_kind(e, {"hop"}, "hops");
      const auto ends = split(e.label, '-');
      if (ends.size() != 2 || !valid_label(ends[0]) || !valid_label(ends[1]))
        throw ConfigError(e.line, e.label, "hop label must look like A-B");
      FieldReader r(e);
      d.hops.push_back({ends[0], ends[1], r.frequency("rate")});
      r.finish();
    }
  }

  if (const ConfigSection* loss = doc.section("loss")) {
    no_settings(*loss);
    for (const auto& e : loss->entries) {
      expect_kind(e, {"loss"}, "loss");
      check_label(e);
      FieldReader r(e);
      if (d.loss.count(e.label)) throw ConfigError(e.line, e.label, "loss given twice");
      d.loss[e.label] = r.frequency("rate");
      r.finish();
    }
  }
  return d;
}

PulseSchedule schedule_from_document(const ConfigDocument& doc, const DeviceSpec& device) {
  const ConfigSection* sec = doc.section("schedule");
  if (!sec) throw ConfigError(0, "schedule", "no [schedule] section");
  PulseSchedule s;
  bool have_duration = false;
  for (const auto& kv : sec->settings) {
    if (kv.key != "duration") throw ConfigError(kv.line, kv.key, "unknown key");
    s.duration = parse_time(kv.value, kv.line, kv.key);
    have_duration = true;
  }
  for (const auto& e : sec->entries) {
    expect_kind(e, {"pulse"}, "schedule");
    FieldReader r(e);
    Pulse p;
    p.mode = e.label;
    if (device.mode_index(p.mode) < 0) throw ConfigError(e.line, p.mode, "pulse on unknown mode");
    p.detuning = r.frequency("detuning");
    p.duration = r.time("duration");
    const bool has_center = e.find("center") != nullptr, has_start = e.find("start") != nullptr;
    if (has_center == has_start) throw ConfigError(e.line, "center", "give exactly one of center or start");
    p.center = has_center ? r.time("center") : r.time("start") + 0.5 * p.duration;
    if (r.take("shape")) {
      const std::string shape = r.need("shape").value;
      if (shape == "ramp") p.shape = PulseShape::ramp;
      else if (shape != "step") throw ConfigError(e.line, "shape", "shape must be step or ramp");
    }
    if (p.shape == PulseShape::ramp) p.ramp = r.time("ramp");
    else if (e.find("ramp")) throw ConfigError(e.line, "ramp", "ramp time given for a step pulse");
    if (r.take("stage")) p.stage = r.need("stage").value;
    r.finish();
    if (!(p.duration > 0.0)) throw ConfigError(e.line, "duration", "pulse duration must be positive");
    s.pulses.push_back(p);
  }
  if (!have_duration) s.duration = s.last_pulse_end();
  check_schedule(device, s);
  return s;
}

DeviceSpec load_device(std::string_view text) { return device_from_document(ConfigDocument::parse(text)); }

PulseSchedule load_schedule(std::string_view text, const DeviceSpec& device) {
  return schedule_from_document(ConfigDocument::parse(text), device);
}

namespace {

std::string ghz(double w) { return format_number(units::to_ghz(w)) + " GHz"; }
std::string mhz(double w) { return format_number(units::to_mhz(w)) + " MHz"; }
std::string khz(double w) { return format_number(units::to_khz(w)) + " kHz"; }

}  // namespace

std::string serialize_device(const DeviceSpec& d) {
  std::ostringstream out;
  out << "format_version = " << config_format_version << "\n";
  if (!d.name.empty()) out << "name = " << d.name << "\n";
  if (!d.description.empty()) out << "description = " << d.description << "\n";
  out << "\n[modes]\n";
  for (const auto& m : d.modes)
    out << "mode " << m.label << ": fundamental " << ghz(m.fundamental) << ", harmonic " << m.harmonic << ", range "
        << format_number(m.tuning_range) << "\n";
  if (!d.spins.empty()) {
    out << "\n[spins]\n";
    for (const auto& s : d.spins) {
      out << "spin " << s.label << ": gap " << ghz(s.gap) << ", coupling " << mhz(s.coupling) << ", mode " << s.mode;
      if (s.spin_count) out << ", count " << format_number(*s.spin_count);
      if (s.single_spin_coupling) out << ", single " << format_number(units::to_khz(*s.single_spin_coupling) * 1e3) << " Hz";
      out << "\n";
    }
  }
  if (d.cpb) {
    const auto& b = *d.cpb;
    out << "\n[cpb]\n";
    if (b.charge_model) {
      const auto& c = *b.charge_model;
      out << "cpb " << b.label << ": ec " << ghz(c.charging_energy) << ", ej " << ghz(c.josephson_energy) << ", ng "
          << format_number(c.gate_charge) << ", nmax " << c.charge_cutoff << "\n";
    } else {
      out << "cpb " << b.label << ": gap01 " << ghz(b.gap01) << ", gap12 " << ghz(b.gap12) << "\n";
    }
    for (const auto& c : b.couplings)
      out << "coupling " << c.mode << ": lower " << mhz(c.lower) << ", upper " << mhz(c.upper) << "\n";
  }
  if (!d.hops.empty()) {
    out << "\n[hops]\n";
    for (const auto& h : d.hops) out << "hop " << h.first << "-" << h.second << ": rate " << mhz(h.rate) << "\n";
  }
  if (!d.loss.empty()) {
    out << "\n[loss]\n";
    for (const auto& [mode, rate] : d.loss) out << "loss " << mode << ": rate " << khz(rate) << "\n";
  }
  return out.str();
}

std::string serialize_schedule(const PulseSchedule& s) {
  std::ostringstream out;
  out << "[schedule]\n";
  out << "duration = " << format_number(s.duration) << " ns\n";
  for (const auto& p : s.pulses) {
    out << "pulse " << p.mode << ": detuning " << ghz(p.detuning) << ", center " << format_number(p.center)
        << " ns, duration " << format_number(p.duration) << " ns";
    if (p.shape == PulseShape::ramp) out << ", shape ramp, ramp " << format_number(p.ramp) << " ns";
    if (!p.stage.empty()) out << ", stage " << p.stage;
    out << "\n";
  }
  return out.str();
}

}  // namespace hybridqc
