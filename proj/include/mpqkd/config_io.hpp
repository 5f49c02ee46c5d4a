#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mpqkd/protocol.hpp"

namespace mpqkd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat `key = value` configuration with '#' comments. Entries keep their
// insertion order and raw value text, so parse -> serialize is idempotent.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);
  std::string serialize() const;

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string require_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double require_number(const std::string& key) const;
  double get_number(const std::string& key, double fallback) const;
  std::uint64_t require_count(const std::string& key) const;
  std::uint64_t get_count(const std::string& key, std::uint64_t fallback) const;
  bool get_flag(const std::string& key, bool fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  const std::string* find(const std::string& key) const;
  std::vector<std::pair<std::string, std::string>> entries_;
};

Variant parse_variant(const std::string& name);
std::string variant_name(Variant variant);

// Builds the protocol configuration from the standard keys (p_d, eta_d,
// alpha, e_d_z, e_d_x, N, l, delta, mu, nu, p_mu, p_nu, variant) with
// symmetric arms of dist_km / 2 each.
ProtocolConfig protocol_from_config(const KeyValueConfig& config,
                                    double dist_km);

struct RunManifest {
  std::string subcommand;
  std::string config_path;
  std::string out_path;  // empty = stdout
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<Variant> variant_override;
  std::string ratio_baseline_path;
};

}  // namespace mpqkd
