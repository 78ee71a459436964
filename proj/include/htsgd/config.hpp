#ifndef HTSGD_CONFIG_HPP
#define HTSGD_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "htsgd/harness.hpp"

namespace htsgd {

// One parsed config value: scalar, string, bool, or homogeneous array.
struct ConfigValue {
  std::variant<double, bool, std::string, std::vector<double>,
               std::vector<std::string>>
      data;
};

// Raw parse of the experiment file: [section] tables of key = value lines.
// Values: numbers, "strings", true/false, and [v, v, ...] arrays of numbers
// or strings. '#' starts a comment. Unknown sections/keys are rejected when
// the schema is applied, with the offending path reported.
class ConfigTable {
 public:
  static ConfigTable parse_file(const std::string& path);
  static ConfigTable parse_string(const std::string& text,
                                  const std::string& origin = "<string>");

  // Applies a dotted-key override "section.key=value".
  void set_override(const std::string& dotted_assignment);

  bool has(const std::string& section, const std::string& key) const;
  const ConfigValue* find(const std::string& section,
                          const std::string& key) const;

  const std::map<std::string, std::map<std::string, ConfigValue>>& sections()
      const {
    return sections_;
  }
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::map<std::string, ConfigValue>> sections_;
  std::string origin_;
};

struct VerifySettings {
  long n = 1000000;
  std::vector<double> radii = {0.1, 1.0, 10.0};
  int directions = 4;
  std::uint64_t seed = 7;
};

struct AuditSettings {
  long n = 100000;
  long phi_samples = 1000000;
  std::vector<double> x_scales = {0.0, 1.0};  // audit points x = s * e1
  std::uint64_t seed = 9;
};

// The full experiment description assembled from a ConfigTable. Checks every
// key against the schema; unknown keys are errors.
struct ExperimentConfig {
  ConfigTable raw;
  RunConfig run;
  EnsembleConfig ensemble;
  VerifySettings verify;
  AuditSettings audit;

  static ExperimentConfig from_table(ConfigTable table);

  // Canonical serialization of the logical experiment (fixed section and key
  // order, 17-digit floats). Execution knobs (thread count) are excluded so
  // re-runs with different pool sizes hash identically.
  std::string canonical() const;
  std::string config_hash() const;
};

}  // namespace htsgd

#endif  // HTSGD_CONFIG_HPP
