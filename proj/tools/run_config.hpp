#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gibrat/effects.hpp"
#include "gibrat/grid_density.hpp"

namespace glcli {

using nlohmann::json;

// Raised by a subcommand whose embedded self-check failed (exit code 4).
struct SelfCheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Values shared by every subcommand, resolved from flags and environment.
// *_given distinguishes "user said so" from built-in defaults, so the
// precedence flag/env > config file > default can be applied.
struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  double oracle_tol = 0.0;
  bool oracle_tol_given = false;
  bool force = false;
};

json load_strict_json(const std::string& path);

// Overlays `user` onto `base` where `base` defines the complete schema:
// a user key missing from base (or with a mismatched JSON type) is a config
// error naming the offending path.  Objects merge recursively; everything
// else replaces.
void merge_strict(json& base, const json& user, const std::string& where);

std::uint64_t fnv1a_hash(const std::string& bytes);
std::string hash_hex(std::uint64_t h);

// Fills in command/flag-derived fields, computes the config hash over the
// canonical dump (hash field excluded), and writes the resolved config to
// <out>/<command>_config.json for replay.
struct ResolvedConfig {
  json cfg;
  std::filesystem::path out_dir;
  std::uint64_t hash = 0;
};
ResolvedConfig resolve_config(const std::string& command, json defaults,
                              const CommonOptions& opts);

// Shared sub-schemas (all keys always present; interpretation by kind/type).
json effect_schema_two_point_first_order(double eps);
json effect_schema_sigma2_asymmetric();
gibrat::EffectDistribution effect_from_json(const json& j);

json initial_schema(const std::string& type);
bool initial_is_density_only(const json& j);

gibrat::LogGrid grid_from_json(const json& j);

// Renders the configured initial datum as a density on the given grid.
// Supported types: "lognormal" and "lognormal_mixture".
gibrat::GridDensity initial_density_on_grid(const json& initial,
                                            const gibrat::LogGrid& grid);

// Shortest round-trip decimal text for CSV cells.
std::string fmt_num(double v);
std::string fmt_int(long long v);

// CSV file whose first line is a timestamp comment (the only
// nondeterministic byte range) followed by the config hash and a header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::uint64_t config_hash,
            const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  void comment(const std::string& text);

 private:
  std::ofstream out_;
};

void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace glcli
