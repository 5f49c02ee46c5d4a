#include "mpqkd/config_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mpqkd {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected `key = value`, got `" + line + "`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (value.empty())
      throw ConfigError("line " + std::to_string(line_no) +
                        ": field `" + key + "` has no value");
    config.set(key, value);
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file `" + path + "`");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string KeyValueConfig::serialize() const {
  std::ostringstream out;
  for (const auto& [key, value] : entries_) out << key << " = " << value
                                                << "\n";
  return out.str();
}

const std::string* KeyValueConfig::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

bool KeyValueConfig::has(const std::string& key) const {
  return find(key) != nullptr;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

std::string KeyValueConfig::require_string(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ConfigError("missing required field `" + key + "`");
  return *v;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double KeyValueConfig::require_number(const std::string& key) const {
  const std::string value = require_string(key);
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size())
      throw ConfigError("field `" + key + "`: trailing characters in `" +
                        value + "`");
    return parsed;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("field `" + key + "`: `" + value +
                      "` is not a number");
  }
}

double KeyValueConfig::get_number(const std::string& key,
                                  double fallback) const {
  return has(key) ? require_number(key) : fallback;
}

std::uint64_t KeyValueConfig::require_count(const std::string& key) const {
  const double value = require_number(key);
  if (!(value >= 0.0 && value <= 1.8e19) || value != std::floor(value))
    throw ConfigError("field `" + key + "` must be a nonnegative integer");
  return static_cast<std::uint64_t>(value);
}

std::uint64_t KeyValueConfig::get_count(const std::string& key,
                                        std::uint64_t fallback) const {
  return has(key) ? require_count(key) : fallback;
}

bool KeyValueConfig::get_flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string value = require_string(key);
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("field `" + key + "`: expected true/false, got `" +
                    value + "`");
}

Variant parse_variant(const std::string& name) {
  if (name == "original") return Variant::Original;
  if (name == "six-state" || name == "sixstate") return Variant::SixState;
  throw ConfigError("unknown variant `" + name +
                    "` (expected original or six-state)");
}

std::string variant_name(Variant variant) {
  return variant == Variant::Original ? "original" : "six-state";
}

ProtocolConfig protocol_from_config(const KeyValueConfig& config,
                                    double dist_km) {
  ProtocolConfig cfg;
  cfg.channel.dark_count_prob = config.require_number("p_d");
  cfg.channel.detector_eff = config.require_number("eta_d");
  cfg.channel.fiber_loss_db_per_km = config.require_number("alpha");
  cfg.channel.dist_a_km = dist_km / 2.0;
  cfg.channel.dist_b_km = dist_km / 2.0;

  IntensityProfile prof;
  prof.mu = config.require_number("mu");
  prof.nu = config.require_number("nu");
  prof.prob_mu = config.require_number("p_mu");
  prof.prob_nu = config.require_number("p_nu");
  prof.prob_vac = 1.0 - prof.prob_mu - prof.prob_nu;
  cfg.intensities_a = prof;
  cfg.intensities_b = prof;

  cfg.misalignment.e_d_z = config.require_number("e_d_z");
  cfg.misalignment.e_d_x = config.require_number("e_d_x");
  cfg.total_rounds = config.require_number("N");
  cfg.max_pair_interval = config.require_count("l");
  cfg.delta = config.require_number("delta");
  cfg.variant = parse_variant(config.require_string("variant"));
  cfg.validate();
  return cfg;
}

}  // namespace mpqkd
