#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"
#include "gibrat/errors.hpp"

namespace {

int dispatch(const std::string& name, const glcli::CommonOptions& opts) {
  if (name == "moments") return glcli::cmd_moments(opts);
  if (name == "simulate") return glcli::cmd_simulate(opts);
  if (name == "wild") return glcli::cmd_wild(opts);
  if (name == "diffuse") return glcli::cmd_diffuse(opts);
  if (name == "converge") return glcli::cmd_converge(opts);
  if (name == "first-order") return glcli::cmd_first_order(opts);
  if (name == "metric") return glcli::cmd_metric(opts);
  throw gibrat::DomainError("unknown subcommand: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Proportional-growth market model toolkit: exact jump Monte Carlo, "
      "interaction-series solutions, the first-order and diffusion limits, "
      "and Fourier-metric error bounds"};
  app.require_subcommand(1);
  app.fallthrough();

  glcli::CommonOptions opts;
  auto* config_opt = app.add_option("--config", opts.config_path,
                                    "JSON config file (strict schema; "
                                    "unknown keys are errors)")
                         ->envname("GIBRAT_CONFIG");
  auto* seed_opt =
      app.add_option("--seed", opts.seed, "RNG seed override")
          ->envname("GIBRAT_SEED");
  app.add_option("--out", opts.out_dir, "output directory (created if absent)")
      ->envname("GIBRAT_OUT");
  auto* tol_opt = app.add_option("--oracle-tol", opts.oracle_tol,
                                 "absolute tolerance override for quadrature "
                                 "oracles")
                      ->envname("GIBRAT_ORACLE_TOL");
  app.add_flag("--force", opts.force,
               "proceed past admissibility refusals (converge)");

  app.add_subcommand("moments",
                     "Monte Carlo moment trajectories vs the closed growth law");
  app.add_subcommand("simulate",
                     "evolve a particle ensemble; dump sizes, CF and histogram");
  app.add_subcommand("wild",
                     "interaction-series CF vs quadrature oracle across effect "
                     "scales");
  app.add_subcommand("diffuse",
                     "solve the diffusion-limit equation and check invariants");
  app.add_subcommand("converge",
                     "weighted L1 distance to the matched lognormal source "
                     "over time");
  app.add_subcommand("first-order",
                     "transport solution of the small-effects limit");
  app.add_subcommand("metric",
                     "order-s Fourier distance between series and oracle, "
                     "with its closed-form bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  opts.seed_given = seed_opt->count() > 0;
  opts.oracle_tol_given = tol_opt->count() > 0;
  (void)config_opt;

  const auto subs = app.get_subcommands();
  try {
    return dispatch(subs.at(0)->get_name(), opts);
  } catch (const glcli::SelfCheckFailure& e) {
    std::fprintf(stderr, "self-check failed: %s\n", e.what());
    return 4;
  } catch (const gibrat::NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const gibrat::DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
