#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

namespace pathlab::cli {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<double> parse_real(const std::string& text) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<std::uint64_t> parse_natural(const std::string& text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return value;
}

}  // namespace

std::string to_string(const Diagnostic& d) {
  const char* kind = d.kind == DiagnosticKind::capacity ? "capacity" : "validation";
  return std::string(kind) + " error: " + d.field + ": " + d.message;
}

std::map<std::string, std::string> parse_key_value(std::istream& in,
                                                   std::vector<Diagnostic>& diagnostics) {
  std::map<std::string, std::string> entries;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      diagnostics.push_back({DiagnosticKind::validation, "line " + std::to_string(number),
                             "expected `key = value`"});
      continue;
    }
    entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return entries;
}

void apply_entries(ExperimentConfig& config, const std::map<std::string, std::string>& entries,
                   std::vector<Diagnostic>& diagnostics) {
  for (const auto& [key, value] : entries) {
    if (key == "experiment") {
      config.experiment = value;
    } else if (key == "seed") {
      if (auto v = parse_natural(value)) {
        config.seed = *v;
      } else {
        diagnostics.push_back({DiagnosticKind::validation, "seed", "expected an unsigned integer"});
      }
    } else if (key == "out") {
      config.out = value;
    } else if (key == "format") {
      if (value == "csv") {
        config.format = Format::csv;
      } else if (value == "json") {
        config.format = Format::json;
      } else {
        diagnostics.push_back({DiagnosticKind::validation, "format", "expected csv or json"});
      }
    } else if (key == "threads") {
      auto v = parse_natural(value);
      if (v && *v >= 1) {
        config.threads = static_cast<unsigned>(*v);
      } else {
        diagnostics.push_back({DiagnosticKind::validation, "threads", "expected an integer >= 1"});
      }
    } else {
      config.params[key] = value;
    }
  }
}

Params::Params(const ExperimentConfig& config, const std::vector<ParamSpec>& specs,
               std::vector<Diagnostic>& diagnostics)
    : config_(config), specs_(specs), diagnostics_(diagnostics) {
  for (const auto& [key, value] : config.params) {
    const bool known = std::any_of(specs.begin(), specs.end(),
                                   [&](const ParamSpec& s) { return s.name == key; });
    if (!known) {
      diagnostics_.push_back({DiagnosticKind::validation, key,
                              "unknown parameter for experiment `" + config.experiment + "`"});
    }
  }
}

std::optional<std::string> Params::raw(const std::string& name) {
  const auto spec = std::find_if(specs_.begin(), specs_.end(),
                                 [&](const ParamSpec& s) { return s.name == name; });
  if (auto it = config_.params.find(name); it != config_.params.end()) {
    resolved_[name] = it->second;
    return it->second;
  }
  if (spec != specs_.end() && spec->fallback) {
    resolved_[name] = *spec->fallback;
    return *spec->fallback;
  }
  diagnostics_.push_back({DiagnosticKind::validation, name, "required parameter is missing"});
  return std::nullopt;
}

double Params::real(const std::string& name) {
  const auto text = raw(name);
  if (!text) return std::nan("");
  if (auto v = parse_real(*text)) return *v;
  diagnostics_.push_back({DiagnosticKind::validation, name, "expected a real number, got `" + *text + "`"});
  return std::nan("");
}

std::uint64_t Params::natural(const std::string& name) {
  const auto text = raw(name);
  if (!text) return 0;
  if (auto v = parse_natural(*text)) return *v;
  diagnostics_.push_back(
      {DiagnosticKind::validation, name, "expected a nonnegative integer, got `" + *text + "`"});
  return 0;
}

std::string Params::text(const std::string& name) { return raw(name).value_or(""); }

std::vector<double> Params::reals(const std::string& name) {
  const auto text = raw(name);
  if (!text) return {};
  std::vector<double> values;
  std::stringstream stream(*text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (auto v = parse_real(trim(item))) {
      values.push_back(*v);
    } else {
      diagnostics_.push_back({DiagnosticKind::validation, name,
                              "expected a comma-separated list of reals, got `" + *text + "`"});
      return {};
    }
  }
  if (values.empty()) {
    diagnostics_.push_back({DiagnosticKind::validation, name, "list must not be empty"});
  }
  return values;
}

bool Params::check(bool ok, const std::string& field, const std::string& message,
                   DiagnosticKind kind) {
  if (!ok) diagnostics_.push_back({kind, field, message});
  return ok;
}

}  // namespace pathlab::cli
