#include "nvdnp/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nvdnp/csv.hpp"

namespace nvdnp {

namespace {

struct UnitDef {
  const char* suffix;
  UnitFamily family;
  double scale;  // to canonical units
};

// canonical: MHz, mT, us, K, mW, ppm
constexpr UnitDef kUnits[] = {
    {"GHz", UnitFamily::kFrequency, 1e3}, {"MHz", UnitFamily::kFrequency, 1.0},
    {"kHz", UnitFamily::kFrequency, 1e-3},
    {"T", UnitFamily::kField, 1e3},       {"mT", UnitFamily::kField, 1.0},
    {"G", UnitFamily::kField, 0.1},
    {"s", UnitFamily::kTime, 1e6},        {"ms", UnitFamily::kTime, 1e3},
    {"us", UnitFamily::kTime, 1.0},       {"ns", UnitFamily::kTime, 1e-3},
    {"K", UnitFamily::kTemperature, 1.0},
    {"W", UnitFamily::kPower, 1e3},       {"mW", UnitFamily::kPower, 1.0},
    {"ppm", UnitFamily::kConcentration, 1.0},
};

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

const UnitDef* find_unit(const std::string& token) {
  for (const auto& u : kUnits)
    if (token == u.suffix) return &u;
  return nullptr;
}

const char* family_suffix(UnitFamily family) {
  switch (family) {
    case UnitFamily::kFrequency: return "MHz";
    case UnitFamily::kField: return "mT";
    case UnitFamily::kTime: return "us";
    case UnitFamily::kTemperature: return "K";
    case UnitFamily::kPower: return "mW";
    case UnitFamily::kConcentration: return "ppm";
    default: return "";
  }
}

[[noreturn]] void fail(int line, const std::string& msg) {
  std::ostringstream out;
  out << "config line " << line << ": " << msg;
  throw ConfigError(out.str());
}

}  // namespace

void RunConfig::set(const std::string& key, ConfigValue value) {
  if (values_.count(key)) fail(value.line, "duplicate key '" + key + "'");
  values_[key] = std::move(value);
  order_.push_back(key);
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

const ConfigValue* RunConfig::find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

const ConfigValue& RunConfig::at(const std::string& key) const {
  const ConfigValue* v = find(key);
  if (!v) throw ConfigError("missing required key '" + key + "'");
  return *v;
}

double RunConfig::number(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (!v.is_number) fail(v.line, "key '" + key + "' must be a number");
  return v.number;
}

double RunConfig::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long RunConfig::integer(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const double v = number(key);
  const long n = static_cast<long>(std::llround(v));
  if (std::abs(v - n) > 1e-9) fail(at(key).line, "key '" + key + "' must be an integer");
  return n;
}

std::string RunConfig::text(const std::string& key) const {
  const ConfigValue& v = at(key);
  return v.is_number ? format_double(v.number) : v.text;
}

std::string RunConfig::text_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double RunConfig::family_value(const std::string& key, double fallback, UnitFamily family,
                               double unitless_scale) const {
  if (!has(key)) return fallback;
  const ConfigValue& v = at(key);
  if (!v.is_number) fail(v.line, "key '" + key + "' must be a number");
  if (v.family == UnitFamily::kNone) return v.number * unitless_scale;
  if (v.family != family)
    fail(v.line, "key '" + key + "' has a unit of the wrong kind");
  return v.number;
}

double RunConfig::frequency_mhz(const std::string& key, double fallback) const {
  return family_value(key, fallback, UnitFamily::kFrequency, 1.0);
}
double RunConfig::field_mt(const std::string& key, double fallback) const {
  return family_value(key, fallback, UnitFamily::kField, 1.0);
}
double RunConfig::field_t(const std::string& key, double fallback) const {
  return family_value(key, fallback * 1e3, UnitFamily::kField, 1e3) * 1e-3;
}
double RunConfig::time_us(const std::string& key, double fallback) const {
  return family_value(key, fallback, UnitFamily::kTime, 1.0);
}
double RunConfig::time_s(const std::string& key, double fallback) const {
  return family_value(key, fallback * 1e6, UnitFamily::kTime, 1e6) * 1e-6;
}
double RunConfig::temperature_k(const std::string& key, double fallback) const {
  return family_value(key, fallback, UnitFamily::kTemperature, 1.0);
}
double RunConfig::power_mw(const std::string& key, double fallback) const {
  return family_value(key, fallback, UnitFamily::kPower, 1.0);
}
double RunConfig::ppm(const std::string& key, double fallback) const {
  return family_value(key, fallback, UnitFamily::kConcentration, 1.0);
}

void RunConfig::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& key : order_) {
    bool ok = false;
    for (const auto& a : allowed)
      if (key == a) { ok = true; break; }
    if (!ok) fail(at(key).line, "unknown key '" + key + "'");
  }
}

void RunConfig::require_present(const std::vector<std::string>& required) const {
  for (const auto& key : required)
    if (!has(key)) throw ConfigError("missing required key '" + key + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(line_no, "empty section name");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (raw.empty()) fail(line_no, "empty value for key '" + key + "'");
    if (!section.empty()) key = section + "." + key;

    ConfigValue value;
    value.line = line_no;

    // number, optionally followed by a unit suffix
    std::istringstream vs(raw);
    std::string first, second, extra;
    vs >> first >> second >> extra;
    char* end = nullptr;
    const double num = std::strtod(first.c_str(), &end);
    if (end && *end == '\0' && !first.empty()) {
      value.is_number = true;
      value.number = num;
      if (!second.empty()) {
        const UnitDef* unit = find_unit(second);
        if (!unit) fail(line_no, "unknown unit '" + second + "' for key '" + key + "'");
        if (!extra.empty()) fail(line_no, "trailing text after unit for key '" + key + "'");
        value.number *= unit->scale;
        value.family = unit->family;
      }
    } else {
      value.text = raw;
    }
    config.set(key, std::move(value));
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string render_config(const RunConfig& config) {
  std::ostringstream out;
  std::string current_section;
  for (const auto& key : config.keys()) {
    const ConfigValue& v = config.at(key);
    std::string section, name = key;
    const std::size_t dot = key.find('.');
    if (dot != std::string::npos) {
      section = key.substr(0, dot);
      name = key.substr(dot + 1);
    }
    if (section != current_section) {
      out << '[' << section << "]\n";
      current_section = section;
    }
    out << name << " = ";
    if (v.is_number) {
      out << format_double(v.number);
      const char* suffix = family_suffix(v.family);
      if (*suffix) out << ' ' << suffix;
    } else {
      out << v.text;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace nvdnp
