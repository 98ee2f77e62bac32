#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Line-oriented run configuration: `key = value` entries under optional
// `[section]` headers, `#` comments, and unit suffixes on numbers
// (GHz/MHz/kHz, T/mT/G, s/ms/us/ns, K, W/mW, ppm) normalized at parse time to
// the internal units (MHz, mT, us, K, mW, ppm).

namespace nvdnp {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class UnitFamily { kNone, kFrequency, kField, kTime, kTemperature, kPower, kConcentration };

struct ConfigValue {
  bool is_number = false;
  double number = 0.0;       // canonical units when a suffix was given
  std::string text;          // raw token for string values
  UnitFamily family = UnitFamily::kNone;
  int line = 0;
};

class RunConfig {
 public:
  void set(const std::string& key, ConfigValue value);

  bool has(const std::string& key) const;
  const ConfigValue& at(const std::string& key) const;  // throws ConfigError

  // typed getters; the native unit applies when the entry had no suffix
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  std::string text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;

  double frequency_mhz(const std::string& key, double fallback) const;
  double field_mt(const std::string& key, double fallback) const;
  double field_t(const std::string& key, double fallback) const;
  double time_us(const std::string& key, double fallback) const;
  double time_s(const std::string& key, double fallback) const;
  double temperature_k(const std::string& key, double fallback) const;
  double power_mw(const std::string& key, double fallback) const;
  double ppm(const std::string& key, double fallback) const;

  // every key must be listed; unknown keys raise ConfigError naming them
  void require_known(const std::vector<std::string>& allowed) const;
  void require_present(const std::vector<std::string>& required) const;

  const std::vector<std::string>& keys() const { return order_; }
  bool empty() const { return order_.empty(); }

 private:
  const ConfigValue* find(const std::string& key) const;
  double family_value(const std::string& key, double fallback, UnitFamily family,
                      double unitless_scale) const;

  std::map<std::string, ConfigValue> values_;
  std::vector<std::string> order_;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical serialization; parse_config(render_config(c)) reproduces c.
std::string render_config(const RunConfig& config);

}  // namespace nvdnp
