#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "experiments.hpp"

using namespace pathlab::cli;

int main(int argc, char** argv) {
  CLI::App app{"pathlab: lattice path sums, propagators and least-time experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  unsigned threads = 1;
  bool dry_run = false;
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (required by sample, pathsum, speedbound)");
  app.add_option("--config", config_path, "flat key = value config file; flags win over it")
      ->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out, "artifact path (manifest is <out>.manifest.json)");
  auto* format_opt =
      app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  auto* threads_opt = app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--dry-run", dry_run, "validate the config and exit");

  // One subcommand per experiment, one flag per parameter.
  std::map<std::string, std::map<std::string, std::string>> flag_values;
  std::map<std::string, CLI::App*> subcommands;
  const std::map<std::string, std::string> summaries = {
      {"sample", "draw intermediate positions and histogram them"},
      {"interfere", "superpose two amplitudes and report the interference term"},
      {"pathsum", "random lattice paths with windings and probabilities"},
      {"propagate", "lattice propagator K(b,a) by transfer or enumeration"},
      {"converge", "propagator error against the free-particle kernel as k grows"},
      {"concentrate", "phase concentration around the least-winding path"},
      {"fermat", "two-media least-time crossing and Snell ratios"},
      {"speedbound", "travel times of random paths against the straight path"},
  };
  for (const auto& name : experiment_names()) {
    const auto it = summaries.find(name);
    auto* sub = app.add_subcommand(name, it == summaries.end() ? "" : it->second);
    sub->set_help_flag("--help", "Print this help message and exit");  // frees --h for the phase quantum
    subcommands[name] = sub;
    for (const auto& spec : parameter_specs(name)) {
      std::string help = spec.help;
      help += spec.fallback ? " [default: " + *spec.fallback + "]" : " [required]";
      sub->add_option("--" + spec.name, flag_values[name][spec.name], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_validation;
  }

  ExperimentConfig config;
  std::vector<Diagnostic> diagnostics;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    apply_entries(config, parse_key_value(in, diagnostics), diagnostics);
  }
  for (const auto& [name, sub] : subcommands) {
    if (!sub->parsed()) continue;
    config.experiment = name;
    for (const auto& spec : parameter_specs(name)) {
      if (sub->get_option("--" + spec.name)->count() > 0) {
        config.params[spec.name] = flag_values[name][spec.name];
      }
    }
  }
  if (seed_opt->count() > 0) config.seed = seed;
  if (out_opt->count() > 0) config.out = out;
  if (format_opt->count() > 0) config.format = format == "json" ? Format::json : Format::csv;
  if (threads_opt->count() > 0) config.threads = threads;

  if (!diagnostics.empty()) {
    for (const auto& d : diagnostics) std::cerr << to_string(d) << '\n';
    return exit_validation;
  }

  if (dry_run) {
    const auto found = validate(config);
    for (const auto& d : found) std::cerr << to_string(d) << '\n';
    if (found.empty()) return exit_ok;
    for (const auto& d : found) {
      if (d.kind == DiagnosticKind::capacity) return exit_capacity;
    }
    return exit_validation;
  }

  const auto result = run(config);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& d : result.diagnostics) std::cerr << to_string(d) << '\n';
  for (const auto& path : result.artifacts) std::cout << path << '\n';
  return result.exit_code;
}
