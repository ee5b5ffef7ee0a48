#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pathlab::cli {

enum class Format { csv, json };

/// One experiment request: the command, its parameters as text, and the
/// global run settings. Parameters are typed later against the experiment's
/// schema, so the same config can come from a file, flags, or code.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> params;
  std::optional<std::uint64_t> seed;
  std::string out;
  Format format = Format::csv;
  unsigned threads = 1;
};

enum class DiagnosticKind { validation, capacity };

struct Diagnostic {
  DiagnosticKind kind = DiagnosticKind::validation;
  std::string field;
  std::string message;
};

std::string to_string(const Diagnostic& d);

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
/// Malformed lines are reported as diagnostics against the line number.
std::map<std::string, std::string> parse_key_value(std::istream& in,
                                                   std::vector<Diagnostic>& diagnostics);

/// Moves the global keys (experiment, seed, out, format, threads) from
/// `entries` into `config`; the rest become experiment parameters. Existing
/// values in `config` are overwritten.
void apply_entries(ExperimentConfig& config, const std::map<std::string, std::string>& entries,
                   std::vector<Diagnostic>& diagnostics);

enum class ParamKind { real, natural, text, real_list };

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::real;
  std::optional<std::string> fallback;  // nullopt: required
  std::string help;
};

/// Typed view of an experiment's parameters. Accessors never throw: a missing
/// or malformed value appends a diagnostic naming the field and yields a
/// placeholder, so a whole config is checked in one pass.
class Params {
 public:
  Params(const ExperimentConfig& config, const std::vector<ParamSpec>& specs,
         std::vector<Diagnostic>& diagnostics);

  double real(const std::string& name);
  std::uint64_t natural(const std::string& name);
  std::string text(const std::string& name);
  std::vector<double> reals(const std::string& name);

  /// Appends a diagnostic unless `ok`.
  bool check(bool ok, const std::string& field, const std::string& message,
             DiagnosticKind kind = DiagnosticKind::validation);

  bool failed() const { return !diagnostics_.empty(); }
  /// Resolved values (defaults filled in), for the run manifest.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }

 private:
  std::optional<std::string> raw(const std::string& name);

  const ExperimentConfig& config_;
  const std::vector<ParamSpec>& specs_;
  std::vector<Diagnostic>& diagnostics_;
  std::map<std::string, std::string> resolved_;
};

}  // namespace pathlab::cli
