#include "run_config.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <system_error>

#include "gibrat/errors.hpp"

namespace glcli {

json load_strict_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw gibrat::DomainError("config file not readable: " + path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw gibrat::DomainError("config parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) {
    throw gibrat::DomainError("config root must be a JSON object: " + path);
  }
  return j;
}

namespace {

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

}  // namespace

void merge_strict(json& base, const json& user, const std::string& where) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = where + "." + it.key();
    if (!base.contains(it.key())) {
      throw gibrat::DomainError("unknown config key: " + path);
    }
    json& slot = base[it.key()];
    if (!same_kind(slot, it.value())) {
      throw gibrat::DomainError("config key has wrong type: " + path);
    }
    if (slot.is_object()) {
      merge_strict(slot, it.value(), path);
    } else {
      slot = it.value();
    }
  }
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ResolvedConfig resolve_config(const std::string& command, json defaults,
                              const CommonOptions& opts) {
  json cfg = std::move(defaults);
  if (!opts.config_path.empty()) {
    const json user = load_strict_json(opts.config_path);
    merge_strict(cfg, user, "config");
  }
  if (cfg.at("version").get<long long>() != 1) {
    throw gibrat::DomainError("unsupported config version (expected 1)");
  }
  const std::string declared = cfg.at("command").get<std::string>();
  if (!declared.empty() && declared != command) {
    throw gibrat::DomainError("config was emitted for subcommand '" + declared +
                              "', not '" + command + "'");
  }
  cfg["command"] = command;
  if (opts.seed_given && cfg.contains("seed")) {
    cfg["seed"] = opts.seed;
  }
  if (opts.oracle_tol_given && cfg.contains("oracle_tol")) {
    if (!(opts.oracle_tol > 0.0)) {
      throw gibrat::DomainError("--oracle-tol must be positive");
    }
    cfg["oracle_tol"] = opts.oracle_tol;
  }

  // Hash the canonical dump with the hash field blanked, then record it.
  cfg["config_hash"] = "";
  ResolvedConfig r;
  r.hash = fnv1a_hash(cfg.dump());
  cfg["config_hash"] = hash_hex(r.hash);
  r.cfg = std::move(cfg);

  r.out_dir = opts.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(r.out_dir, ec);
  if (ec) {
    throw gibrat::DomainError("cannot create output directory: " +
                              r.out_dir.string());
  }
  write_json_file(r.out_dir / (command + "_config.json"), r.cfg);
  return r;
}

json effect_schema_two_point_first_order(double eps) {
  return json{{"kind", "two_point_first_order"},
              {"epsilon", eps},
              {"base_points", json::array()},
              {"base_weights", json::array()}};
}

json effect_schema_sigma2_asymmetric() {
  // Two-atom base law with mean 0, second moment 2 and a nonzero third
  // moment, so the kinetic-vs-diffusion gap carries the generic sqrt(eps)
  // leading term.  A symmetric base law has all odd moments equal to zero
  // and converges one full order faster, which would make rate sweeps
  // uninformative.
  return json{{"kind", "scaled_bounded"},
              {"epsilon", 1e-3},
              {"base_points", json::array({20.0 / 9.0, -9.0 / 10.0})},
              {"base_weights", json::array({81.0 / 281.0, 200.0 / 281.0})}};
}

gibrat::EffectDistribution effect_from_json(const json& j) {
  gibrat::EffectSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  spec.epsilon = j.at("epsilon").get<double>();
  spec.base_points = j.at("base_points").get<std::vector<double>>();
  spec.base_weights = j.at("base_weights").get<std::vector<double>>();
  if (spec.kind != "scaled_bounded" &&
      (!spec.base_points.empty() || !spec.base_weights.empty())) {
    throw gibrat::DomainError(
        "effect.base_points/base_weights apply only to kind scaled_bounded");
  }
  return gibrat::EffectDistribution::from_spec(spec);
}

json initial_schema(const std::string& type) {
  json j{{"type", type},
         {"x0", 1.0},
         {"t0", 0.5},
         {"mean", 1.0},
         {"weights", json::array()},
         {"log_means", json::array()},
         {"log_vars", json::array()}};
  if (type == "lognormal_mixture") {
    j["weights"] = json::array({0.5, 0.5});
    j["log_means"] = json::array({-2.0, 1.0});
    j["log_vars"] = json::array({0.25, 0.25});
  }
  return j;
}

bool initial_is_density_only(const json& j) {
  return j.at("type").get<std::string>() == "lognormal_mixture";
}

gibrat::LogGrid grid_from_json(const json& j) {
  return gibrat::LogGrid(j.at("x_min").get<double>(), j.at("x_max").get<double>(),
                         j.at("points").get<std::size_t>());
}

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double lognormal_pdf(double x, double mu, double s2) {
  if (!(x > 0.0)) return 0.0;
  const double y = std::log(x);
  const double q = (y - mu) * (y - mu) / (2.0 * s2);
  return std::exp(-q - y) / std::sqrt(2.0 * kPi * s2);
}

}  // namespace

gibrat::GridDensity initial_density_on_grid(const json& initial,
                                            const gibrat::LogGrid& grid) {
  const std::string type = initial.at("type").get<std::string>();
  if (type == "lognormal") {
    const double t0 = initial.at("t0").get<double>();
    const double mean = initial.at("mean").get<double>();
    if (!(t0 > 0.0) || !(mean > 0.0)) {
      throw gibrat::DomainError("lognormal initial requires t0 > 0 and mean > 0");
    }
    const double mu = std::log(mean) - t0;
    const double s2 = 2.0 * t0;
    return gibrat::GridDensity::from_function(
        grid, [&](double x) { return lognormal_pdf(x, mu, s2); });
  }
  if (type == "lognormal_mixture") {
    const auto w = initial.at("weights").get<std::vector<double>>();
    const auto mu = initial.at("log_means").get<std::vector<double>>();
    const auto s2 = initial.at("log_vars").get<std::vector<double>>();
    if (w.empty() || w.size() != mu.size() || w.size() != s2.size()) {
      throw gibrat::DomainError(
          "lognormal_mixture needs equal-length weights/log_means/log_vars");
    }
    double wsum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!(w[i] > 0.0) || !(s2[i] > 0.0) || !std::isfinite(mu[i])) {
        throw gibrat::DomainError("lognormal_mixture component out of range");
      }
      wsum += w[i];
    }
    if (std::abs(wsum - 1.0) > 1e-12) {
      throw gibrat::DomainError("lognormal_mixture weights must sum to 1");
    }
    return gibrat::GridDensity::from_function(grid, [&](double x) {
      double v = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        v += w[i] * lognormal_pdf(x, mu[i], s2[i]);
      }
      return v;
    });
  }
  throw gibrat::DomainError("initial.type '" + type +
                            "' is not a density; use lognormal or "
                            "lognormal_mixture");
}

std::string fmt_num(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_int(long long v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::uint64_t config_hash,
                     const std::vector<std::string>& columns)
    : out_(path) {
  if (!out_) {
    throw gibrat::DomainError("cannot open output file: " + path.string());
  }
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::tm tm_utc{};
  gmtime_r(&tt, &tm_utc);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  // The timestamp is the only nondeterministic line; replay comparisons
  // drop line 1 and require byte identity below it.
  out_ << "# generated " << stamp << "\n";
  out_ << "# config_hash " << hash_hex(config_hash) << "\n";
  std::string head;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) head += ',';
    head += columns[i];
  }
  out_ << head << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  out_ << line << "\n";
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << "\n"; }

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw gibrat::DomainError("cannot open output file: " + path.string());
  }
  out << j.dump(2) << "\n";
}

}  // namespace glcli
