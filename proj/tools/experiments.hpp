#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace pathlab::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 1;
inline constexpr int exit_capacity = 2;

const std::vector<std::string>& experiment_names();

/// Parameter schema of an experiment; empty for an unknown name.
const std::vector<ParamSpec>& parameter_specs(const std::string& experiment);

/// Everything `run` would reject, without computing anything. Empty iff the
/// config passes validation.
std::vector<Diagnostic> validate(const ExperimentConfig& config);

struct RunResult {
  int exit_code = exit_ok;
  std::vector<Diagnostic> diagnostics;
  std::vector<std::string> artifacts;  // paths written, manifest last
  std::vector<std::string> warnings;
};

/// Validates, runs the experiment, writes its artifacts and a JSON manifest
/// next to `config.out`.
RunResult run(const ExperimentConfig& config);

/// `out` with `.tag` inserted before the extension: runs.csv -> runs.hist.csv.
std::string sibling_path(const std::string& out, const std::string& tag);

/// Default artifact path for an experiment and format.
std::string default_out(const std::string& experiment, Format format);

}  // namespace pathlab::cli
