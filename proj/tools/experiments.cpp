#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <variant>

#include "json.hpp"
#include "pathlab/amplitude.hpp"
#include "pathlab/classical_limit.hpp"
#include "pathlab/csv.hpp"
#include "pathlab/errors.hpp"
#include "pathlab/intermediate_set.hpp"
#include "pathlab/pathsum.hpp"
#include "pathlab/propagator.hpp"

#ifndef PATHLAB_VERSION
#define PATHLAB_VERSION "0.0.0"
#endif

namespace pathlab::cli {

namespace {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Tables: one shape for both the CSV and the JSON artifact.

using Cell = std::variant<double, std::uint64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  template <typename... Ts>
  void add(const Ts&... cells) {
    rows.push_back({Cell(cells)...});
  }
};

std::string cell_text(const Cell& c) {
  return std::visit([](const auto& v) { return csv::num(v); }, c);
}

json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> json {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>) {
          if (!std::isfinite(v)) return csv::num(v);
        }
        return v;
      },
      c);
}

void write_table(const std::string& path, const Table& table, Format format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open `" + path + "` for writing");
  if (format == Format::csv) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      out << (i ? "," : "") << table.columns[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
      out << '\n';
    }
  } else {
    json rows = json::array();
    for (const auto& row : table.rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = cell_json(row[i]);
      rows.push_back(std::move(obj));
    }
    out << rows.dump(2) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Experiment context.

struct Context {
  const ExperimentConfig& config;
  std::vector<Diagnostic>& diagnostics;
  Params params;
  bool dry_run = false;
  std::string out;
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;
  json results = json::object();

  Context(const ExperimentConfig& c, const std::vector<ParamSpec>& specs,
          std::vector<Diagnostic>& d, bool dry)
      : config(c), diagnostics(d), params(c, specs, d), dry_run(dry) {}

  /// True when the body should return: validation failed or this is a dry run.
  bool stop() const { return dry_run || !diagnostics.empty(); }

  void emit(const std::string& path, const Table& table) {
    write_table(path, table, config.format);
    artifacts.push_back(path);
  }
  std::string sibling(const std::string& tag) const { return sibling_path(out, tag); }
};

using Body = std::function<void(Context&)>;

struct Experiment {
  std::string name;
  std::vector<ParamSpec> specs;
  bool needs_seed = false;
  Body body;
};

ParamSpec real_param(std::string name, std::optional<std::string> fallback, std::string help) {
  return {std::move(name), ParamKind::real, std::move(fallback), std::move(help)};
}
ParamSpec natural_param(std::string name, std::optional<std::string> fallback, std::string help) {
  return {std::move(name), ParamKind::natural, std::move(fallback), std::move(help)};
}
ParamSpec text_param(std::string name, std::optional<std::string> fallback, std::string help) {
  return {std::move(name), ParamKind::text, std::move(fallback), std::move(help)};
}
ParamSpec list_param(std::string name, std::optional<std::string> fallback, std::string help) {
  return {std::move(name), ParamKind::real_list, std::move(fallback), std::move(help)};
}

std::vector<ParamSpec> lattice_specs(const std::map<std::string, std::string>& defaults) {
  auto fb = [&](const std::string& key) -> std::optional<std::string> {
    if (auto it = defaults.find(key); it != defaults.end()) return it->second;
    return std::nullopt;
  };
  return {
      real_param("r_min", fb("r_min"), "left edge of the space grid"),
      real_param("r_max", fb("r_max"), "right edge of the space grid"),
      natural_param("m_sites", fb("m_sites"), "number of lattice sites (>= 2)"),
      natural_param("k", fb("k"), "number of time slices (>= 1)"),
      real_param("t_a", fb("t_a"), "initial time"),
      real_param("T", fb("T"), "duration t_b - t_a (> 0)"),
      real_param("mass", fb("mass"), "particle mass (> 0)"),
      real_param("h", fb("h"), "phase quantum h (> 0); hbar = h / 2 pi"),
      text_param("lagrangian", fb("lagrangian"), "free | harmonic"),
      real_param("omega", fb("omega"), "harmonic angular frequency"),
      real_param("a", fb("a"), "start position (must be a site)"),
      real_param("b", fb("b"), "end position (must be a site)"),
  };
}

std::vector<ParamSpec> concat(std::vector<ParamSpec> a, const std::vector<ParamSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<ParamSpec> without(std::vector<ParamSpec> specs, const std::string& name) {
  std::erase_if(specs, [&](const ParamSpec& s) { return s.name == name; });
  return specs;
}

struct Lattice {
  TimeGrid tgrid;
  SpaceGrid sgrid;
  LagrangianModel lagrangian;
  PhaseQuantum quantum;
  std::size_t i_a = 0;
  std::size_t i_b = 0;
};

/// Reads the shared lattice keys. `with_h` is false for sweeps that supply h themselves.
std::optional<Lattice> read_lattice(Context& ctx, bool with_h = true) {
  auto& p = ctx.params;
  const double r_min = p.real("r_min");
  const double r_max = p.real("r_max");
  const auto m_sites = p.natural("m_sites");
  const auto k = p.natural("k");
  const double t_a = p.real("t_a");
  const double duration = p.real("T");
  const double mass = p.real("mass");
  const double h = with_h ? p.real("h") : 1.0;
  const std::string kind = p.text("lagrangian");
  const double omega = p.real("omega");
  const double a = p.real("a");
  const double b = p.real("b");
  if (p.failed()) return std::nullopt;

  bool ok = true;
  ok &= p.check(k >= 1, "k", "time partition needs k >= 1 (and t_b > t_a)");
  ok &= p.check(duration > 0.0, "T", "time partition needs t_b > t_a, i.e. T > 0");
  ok &= p.check(m_sites >= 2, "m_sites", "space grid needs at least 2 sites");
  ok &= p.check(r_max > r_min, "r_max", "space grid needs r_max > r_min");
  ok &= p.check(mass > 0.0, "mass", "mass must be positive");
  ok &= p.check(h > 0.0, "h", "phase quantum must be positive");
  ok &= p.check(kind == "free" || kind == "harmonic", "lagrangian", "expected free or harmonic");
  if (!ok) return std::nullopt;

  Lattice lat;
  lat.tgrid = make_partition(t_a, t_a + duration, k);
  lat.sgrid = make_space_grid(r_min, r_max, m_sites);
  lat.lagrangian = kind == "free" ? free_particle(mass) : harmonic_oscillator(mass, omega);
  lat.quantum = {h};
  try {
    lat.i_a = lat.sgrid.index_of(a);
  } catch (const InvalidInput& e) {
    p.check(false, "a", e.what());
  }
  try {
    lat.i_b = lat.sgrid.index_of(b);
  } catch (const InvalidInput& e) {
    p.check(false, "b", e.what());
  }
  if (p.failed()) return std::nullopt;
  return lat;
}

bool check_budget(Context& ctx, const Lattice& lat, std::uint64_t max_paths,
                  const std::string& field) {
  const auto count = path_count(lat.sgrid.sites, lat.tgrid.steps);
  return ctx.params.check(count <= max_paths, field,
                          "m_sites^(k-1) = " + std::to_string(lat.sgrid.sites) + "^" +
                              std::to_string(lat.tgrid.steps - 1) +
                              " paths exceed the budget max_paths = " + std::to_string(max_paths) +
                              "; reduce m_sites or k, or use method = transfer",
                          DiagnosticKind::capacity);
}

json amplitude_json(Amplitude z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

// ---------------------------------------------------------------------------
// sample

double normal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

void run_sample(Context& ctx) {
  auto& p = ctx.params;
  const std::string kind = p.text("distribution");
  const double lo = p.real("r_lo");
  const double hi = p.real("r_hi");
  const double mu = p.real("mu");
  const double sigma = p.real("sigma");
  const auto count = p.natural("count");
  const auto bins = p.natural("bins");
  const auto unit_index = p.natural("unit_index");
  if (p.failed()) return;
  p.check(kind == "gaussian" || kind == "uniform", "distribution", "expected gaussian or uniform");
  p.check(hi > lo, "r_hi", "support needs r_hi > r_lo");
  p.check(sigma > 0.0, "sigma", "sigma must be positive");
  p.check(count >= 1, "count", "need at least one draw");
  p.check(bins >= 1, "bins", "need at least one bin");
  if (ctx.stop()) return;

  const Interval support{lo, hi};
  const auto envelope = Envelope::gaussian(mu, sigma, support);
  const auto dist = kind == "uniform"
                        ? MappingDistribution::uniform(support)
                        : MappingDistribution::from_density(support, [&](double r) {
                            return born(eval_psi(envelope, 0.0, r));
                          });
  const IntermediatePoint point{unit_index, 0};
  const auto samples = sample_images(point, dist, count, *ctx.config.seed);
  const auto hist = empirical_density(samples, bins, support);

  std::vector<double> exact(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const double x0 = hist.edges[i], x1 = hist.edges[i + 1];
    exact[i] = kind == "uniform" ? (x1 - x0) / (hi - lo)
                                 : (normal_cdf(x1, mu, sigma) - normal_cdf(x0, mu, sigma)) /
                                       (normal_cdf(hi, mu, sigma) - normal_cdf(lo, mu, sigma));
  }

  Table draws{{"index", "r"}, {}};
  for (std::size_t i = 0; i < samples.size(); ++i) draws.add(std::uint64_t{i}, samples[i]);
  Table histogram{{"bin_lo", "bin_hi", "frequency"}, {}};
  for (std::size_t i = 0; i < bins; ++i) {
    histogram.add(hist.edges[i], hist.edges[i + 1], hist.frequencies[i]);
  }
  ctx.emit(ctx.out, draws);
  ctx.emit(ctx.sibling("hist"), histogram);
  ctx.results["normalization"] = dist.normalization();
  ctx.results["total_variation_vs_exact"] = total_variation(hist.frequencies, exact);
}

// ---------------------------------------------------------------------------
// interfere

void run_interfere(Context& ctx) {
  auto& p = ctx.params;
  const double a1 = p.real("A1");
  const double n1 = p.real("n1");
  const double a2 = p.real("A2");
  const double n2 = p.real("n2");
  const auto points = p.natural("table_points");
  const double wavenumber = p.real("wavenumber");
  const double mu = p.real("mu");
  const double sigma = p.real("sigma");
  if (p.failed()) return;
  p.check(a1 >= 0.0, "A1", "envelope values must be nonnegative");
  p.check(a2 >= 0.0, "A2", "envelope values must be nonnegative");
  p.check(sigma > 0.0, "sigma", "sigma must be positive");
  if (ctx.stop()) return;

  const Interval unit{0.0, 0.0};
  const Amplitude psi_a = eval_psi(Envelope::constant(a1, unit), n1, 0.0);
  const Amplitude psi_b = eval_psi(Envelope::constant(a2, unit), n2, 0.0);
  const Amplitude terms[] = {psi_a, psi_b};
  const Amplitude psi_union = superpose(terms);
  const double p_a = born(psi_a);
  const double p_b = born(psi_b);
  const double p_union = born(psi_union);
  const double p_additive = p_a + p_b;

  Table summary{{"quantity", "value"}, {}};
  summary.add(std::string("p_a"), p_a);
  summary.add(std::string("p_b"), p_b);
  summary.add(std::string("p_union"), p_union);
  summary.add(std::string("p_additive"), p_additive);
  summary.add(std::string("union_over_single_a"), p_a > 0.0 ? p_union / p_a : std::nan(""));
  summary.add(std::string("additive_over_single_a"), p_a > 0.0 ? p_additive / p_a : std::nan(""));
  ctx.emit(ctx.out, summary);

  if (points > 0) {
    const Interval window{mu - 6.0 * sigma, mu + 6.0 * sigma};
    const auto envelope = Envelope::gaussian(mu, sigma, window);
    Table table{{"r", "re", "im", "prob"}, {}};
    for (std::uint64_t i = 0; i < points; ++i) {
      const double r = points == 1 ? mu
                                   : window.lo + window.width() * static_cast<double>(i) /
                                                     static_cast<double>(points - 1);
      const Amplitude psi = eval_psi(envelope, n1 + wavenumber * r, r);
      table.add(r, psi.real(), psi.imag(), born(psi));
    }
    ctx.emit(ctx.sibling("table"), table);
  }
  ctx.results["p_union"] = p_union;
  ctx.results["p_additive"] = p_additive;
}

// ---------------------------------------------------------------------------
// pathsum

void run_pathsum(Context& ctx) {
  auto lat = read_lattice(ctx);
  const auto count = ctx.params.natural("paths");
  if (ctx.stop() || !lat) return;

  const auto best =
      least_winding_path(lat->lagrangian, lat->quantum, lat->tgrid, lat->sgrid, lat->i_a, lat->i_b);
  Rng rng(*ctx.config.seed);
  std::vector<LatticePath> paths{best.path};
  for (std::uint64_t i = 0; i < count; ++i) {
    paths.push_back(random_path(lat->sgrid, lat->tgrid.steps, lat->i_a, lat->i_b, rng));
  }
  Table report{{"path_id", "m", "action"}, {}};
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double m = path_winding(paths[i], lat->lagrangian, lat->quantum, lat->tgrid, lat->sgrid);
    report.add(std::uint64_t{i}, m, lat->quantum.h * m);
  }
  Table dump{{"step", "t", "r"}, {}};
  for (std::size_t i = 0; i < best.path.sites.size(); ++i) {
    dump.add(std::uint64_t{i}, lat->tgrid.node(i), lat->sgrid.position(best.path.sites[i]));
  }
  ctx.emit(ctx.out, report);
  ctx.emit(ctx.sibling("path"), dump);
  ctx.results["m_min"] = best.m_min;
  ctx.results["runner_up_gap"] = std::isfinite(best.runner_up_gap) ? json(best.runner_up_gap)
                                                                   : json("inf");
}

// ---------------------------------------------------------------------------
// propagate

std::optional<PropagatorOptions> read_propagator_options(Context& ctx) {
  auto& p = ctx.params;
  const std::string norm = p.text("normalization");
  const double width = p.real("absorber_width");
  const double strength = p.real("absorber_strength");
  const auto max_paths = p.natural("max_paths");
  if (p.failed()) return std::nullopt;
  bool ok = p.check(norm == "feynman" || norm == "raw", "normalization", "expected feynman or raw");
  ok &= p.check(width >= 0.0, "absorber_width", "must be nonnegative");
  ok &= p.check(strength >= 0.0, "absorber_strength", "must be nonnegative");
  if (!ok) return std::nullopt;
  PropagatorOptions options;
  options.normalization = norm == "raw" ? Normalization::raw : Normalization::feynman;
  if (width > 0.0 && strength > 0.0) options.absorber = AbsorbingLayer{width, strength};
  options.max_paths = max_paths;
  options.threads = ctx.config.threads;
  return options;
}

std::optional<Amplitude> oracle_for(const Lattice& lat) {
  if (lat.lagrangian.name != "free_particle") return std::nullopt;
  return analytic_free_particle(lat.sgrid.position(lat.i_a), lat.sgrid.position(lat.i_b),
                                lat.tgrid.duration(), lat.lagrangian.mass, lat.quantum.hbar());
}

void warn_near_boundary(Context& ctx, const SpaceGrid& sgrid, double a, double b) {
  const double margin = 0.1 * (sgrid.r_max - sgrid.r_min);
  if (std::min(a, b) - sgrid.r_min < margin || sgrid.r_max - std::max(a, b) < margin) {
    ctx.warnings.push_back("classical path lies within 10% of the box boundary; "
                           "truncation effects may dominate");
  }
}

Table propagator_table(std::span<const PropagatorReportRow> rows) {
  Table t{{"k", "m_sites", "epsilon", "re_K", "im_K", "abs_K", "phase_K", "abs_err_vs_oracle",
           "phase_err_vs_oracle"},
          {}};
  for (const auto& r : rows) {
    t.add(std::uint64_t{r.k}, std::uint64_t{r.m_sites}, r.epsilon, r.kernel.real(),
          r.kernel.imag(), std::abs(r.kernel), std::arg(r.kernel), r.abs_err_vs_oracle,
          r.phase_err_vs_oracle);
  }
  return t;
}

void run_propagate(Context& ctx) {
  auto lat = read_lattice(ctx);
  auto options = read_propagator_options(ctx);
  const std::string method = ctx.params.text("method");
  const std::string cross = ctx.params.text("cross_check");
  if (!lat || !options) return;
  ctx.params.check(method == "transfer" || method == "bruteforce", "method",
                   "expected transfer or bruteforce");
  ctx.params.check(cross == "auto" || cross == "on" || cross == "off", "cross_check",
                   "expected auto, on or off");
  const bool enumerable = path_count(lat->sgrid.sites, lat->tgrid.steps) <= options->max_paths;
  if (method == "bruteforce" || cross == "on") check_budget(ctx, *lat, options->max_paths, "m_sites");
  if (ctx.stop()) return;

  warn_near_boundary(ctx, lat->sgrid, lat->sgrid.position(lat->i_a),
                     lat->sgrid.position(lat->i_b));
  auto compute = [&](const std::string& which) {
    return which == "bruteforce" ? propagator_bruteforce(lat->i_a, lat->i_b, lat->tgrid,
                                                         lat->sgrid, lat->lagrangian,
                                                         lat->quantum, *options)
                                 : propagator_transfer(lat->i_a, lat->i_b, lat->tgrid,
                                                       lat->sgrid, lat->lagrangian, lat->quantum,
                                                       *options);
  };
  const auto result = compute(method);
  const PropagatorReportRow rows[] = {make_report_row(result, oracle_for(*lat))};
  ctx.emit(ctx.out, propagator_table(rows));

  ctx.results["kernel"] = amplitude_json(result.kernel);
  ctx.results["normalization_per_step"] = amplitude_json(result.normalization_per_step);
  ctx.results["paths_summed"] = result.paths_summed;
  if (cross == "on" || (cross == "auto" && enumerable)) {
    const auto other = compute(method == "transfer" ? "bruteforce" : "transfer");
    const double diff = std::max(std::abs(other.kernel.real() - result.kernel.real()),
                                 std::abs(other.kernel.imag() - result.kernel.imag()));
    ctx.results["cross_check"] = {{"performed", true}, {"max_component_diff", diff}};
    if (!(diff <= 1e-10)) {
      ctx.warnings.push_back("brute-force and transfer kernels differ by " + csv::num(diff));
    }
  } else {
    ctx.results["cross_check"] = {{"performed", false}};
  }
}

// ---------------------------------------------------------------------------
// converge

void run_converge(Context& ctx) {
  auto& p = ctx.params;
  const double r_min = p.real("r_min");
  const double r_max = p.real("r_max");
  const double a = p.real("a");
  const double b = p.real("b");
  const double t_a = p.real("t_a");
  const double duration = p.real("T");
  const double mass = p.real("mass");
  const double h = p.real("h");
  const auto ks = p.reals("ks");
  const double ratio = p.real("grid_ratio");
  const auto min_sites = p.natural("min_sites");
  auto options = read_propagator_options(ctx);
  if (p.failed() || !options) return;
  p.check(r_max > r_min, "r_max", "space grid needs r_max > r_min");
  p.check(duration > 0.0, "T", "time partition needs T > 0");
  p.check(mass > 0.0, "mass", "mass must be positive");
  p.check(h > 0.0, "h", "phase quantum must be positive");
  p.check(ratio > 0.0, "grid_ratio", "must be positive");

  std::vector<SpaceGrid> grids;
  for (double kd : ks) {
    if (!p.check(kd >= 1.0 && kd == std::floor(kd), "ks",
                 "time partition needs integer k >= 1 (and t_b > t_a)")) {
      continue;
    }
    if (p.failed()) continue;
    const double epsilon = duration / kd;
    const double cells = (r_max - r_min) * ratio / epsilon;
    const double whole = std::round(cells);
    if (!p.check(std::abs(cells - whole) < 1e-9 * std::max(1.0, cells), "grid_ratio",
                 "(r_max - r_min) / (epsilon / grid_ratio) must be an integer for k = " +
                     csv::num(kd))) {
      continue;
    }
    const auto sites = static_cast<std::size_t>(whole) + 1;
    p.check(sites >= min_sites, "min_sites",
            "k = " + csv::num(kd) + " gives only " + std::to_string(sites) + " sites");
    grids.push_back(make_space_grid(r_min, r_max, sites));
    for (auto [name, x] : {std::pair{"a", a}, std::pair{"b", b}}) {
      try {
        grids.back().index_of(x);
      } catch (const InvalidInput& e) {
        p.check(false, name, e.what());
      }
    }
  }
  if (ctx.stop()) return;

  warn_near_boundary(ctx, grids.front(), a, b);
  const auto lagrangian = free_particle(mass);
  const PhaseQuantum quantum{h};
  const Amplitude oracle = analytic_free_particle(a, b, duration, mass, quantum.hbar());
  std::vector<PropagatorReportRow> rows;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const auto tgrid = make_partition(t_a, t_a + duration, static_cast<std::size_t>(ks[i]));
    const auto& sgrid = grids[i];
    const auto result = propagator_transfer(sgrid.index_of(a), sgrid.index_of(b), tgrid, sgrid,
                                            lagrangian, quantum, *options);
    rows.push_back(make_report_row(result, oracle));
  }
  ctx.emit(ctx.out, propagator_table(rows));

  bool abs_monotone = true, phase_monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    abs_monotone &= rows[i].abs_err_vs_oracle < rows[i - 1].abs_err_vs_oracle;
    phase_monotone &= rows[i].phase_err_vs_oracle < rows[i - 1].phase_err_vs_oracle;
  }
  ctx.results["oracle"] = amplitude_json(oracle);
  ctx.results["final_abs_err"] = rows.back().abs_err_vs_oracle;
  ctx.results["final_phase_err"] = rows.back().phase_err_vs_oracle;
  ctx.results["abs_err_monotone"] = abs_monotone;
  ctx.results["phase_err_monotone"] = phase_monotone;
}

// ---------------------------------------------------------------------------
// concentrate

void run_concentrate(Context& ctx) {
  auto lat = read_lattice(ctx, false);
  const auto h_values = ctx.params.reals("h_values");
  const double delta = ctx.params.real("delta");
  const auto max_paths = ctx.params.natural("max_paths");
  if (!lat || ctx.params.failed()) return;
  ctx.params.check(delta > 0.0, "delta", "window must be positive");
  for (std::size_t i = 0; i < h_values.size(); ++i) {
    ctx.params.check(h_values[i] > 0.0, "h_values", "every h must be positive");
    if (i > 0) {
      ctx.params.check(h_values[i] < h_values[i - 1], "h_values", "h values must strictly descend");
    }
  }
  check_budget(ctx, *lat, max_paths, "m_sites");
  if (ctx.stop()) return;

  const auto curve = phase_concentration(lat->lagrangian, lat->tgrid, lat->sgrid, lat->i_a,
                                         lat->i_b, h_values, delta, max_paths);
  Table t{{"h", "rho", "m_min", "paths_in_window", "total_paths"}, {}};
  bool increasing = true;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& c = curve[i];
    t.add(c.h, c.rho, c.m_min, c.paths_in_window, c.total_paths);
    if (i > 0) increasing &= c.rho > curve[i - 1].rho;
  }
  ctx.emit(ctx.out, t);
  ctx.results["rho_strictly_increasing"] = increasing;
}

// ---------------------------------------------------------------------------
// fermat / speedbound

struct Endpoints {
  Point2 a, b;
};

std::optional<Endpoints> read_endpoints(Context& ctx, double interface_y) {
  auto& p = ctx.params;
  const Endpoints e{{p.real("ax"), p.real("ay")}, {p.real("bx"), p.real("by")}};
  if (p.failed()) return std::nullopt;
  if (!p.check(e.a.y >= interface_y && e.b.y <= interface_y, "ay",
               "a must lie on the upper side (ay >= interface_y) and b on the lower side")) {
    return std::nullopt;
  }
  return e;
}

void run_fermat(Context& ctx) {
  auto& p = ctx.params;
  const double v1 = p.real("v1");
  const double lo = p.real("v2_lo");
  const double hi = p.real("v2_hi");
  const auto steps = p.natural("v2_steps");
  const double y0 = p.real("interface_y");
  const double tol = p.real("tol");
  const auto ends = read_endpoints(ctx, y0);
  if (p.failed() || !ends) return;
  p.check(v1 > 0.0, "v1", "speeds must be positive");
  p.check(lo > 0.0 && hi > 0.0, "v2_lo", "speeds must be positive");
  p.check(steps >= 1, "v2_steps", "need at least one speed");
  p.check(tol > 0.0, "tol", "tolerance must be positive");
  if (ctx.stop()) return;

  Table t{{"v1", "v2", "crossing", "time", "sin_ratio", "speed_ratio", "residual"}, {}};
  double worst = 0.0;
  for (std::uint64_t i = 0; i < steps; ++i) {
    const double v2 = steps == 1 ? lo
                                 : lo + (hi - lo) * static_cast<double>(i) /
                                            static_cast<double>(steps - 1);
    const MediumProfile profile{v1, v2, y0};
    const auto sol = fermat_minimize(profile, ends->a, ends->b, tol);
    const auto snell = snell_check(profile, ends->a, ends->b, sol.crossing);
    t.add(v1, v2, sol.crossing, sol.time, snell.sin_ratio, snell.speed_ratio, snell.residual);
    if (std::isfinite(snell.residual)) worst = std::max(worst, snell.residual);
  }
  ctx.emit(ctx.out, t);
  ctx.results["max_residual"] = worst;
}

void run_speedbound(Context& ctx) {
  auto& p = ctx.params;
  const double v1 = p.real("v1");
  const double v2 = p.real("v2");
  const double y0 = p.real("interface_y");
  const auto count = p.natural("paths");
  const auto bends = p.natural("max_bends");
  const auto ends = read_endpoints(ctx, y0);
  if (p.failed() || !ends) return;
  p.check(v1 > 0.0, "v1", "speeds must be positive");
  p.check(v2 > 0.0, "v2", "speeds must be positive");
  if (ctx.stop()) return;

  const MediumProfile profile{v1, v2, y0};
  Rng rng(*ctx.config.seed);
  const auto paths = sample_admissible_paths(profile, ends->a, ends->b, count, rng, bends);
  const auto report = speed_bound_check(profile, ends->a, ends->b, paths);
  const double length = distance(ends->a, ends->b);
  Table t{{"path_id", "time", "average_speed", "slack"}, {}};
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double time = report.path_times[i];
    t.add(std::uint64_t{i}, time, length / time, time - report.time_star);
  }
  ctx.emit(ctx.out, t);
  ctx.results["time_star"] = report.time_star;
  ctx.results["bound_speed"] = report.bound_speed;
  ctx.results["min_path_time"] = report.min_path_time;
  ctx.results["max_path_speed"] = report.max_path_speed;
  ctx.results["violations"] = report.violations;
  if (report.violations > 0) {
    ctx.warnings.push_back(std::to_string(report.violations) + " sampled paths beat the bound");
  }
}

// ---------------------------------------------------------------------------

const std::vector<ParamSpec> propagator_option_specs = {
    text_param("normalization", "feynman", "feynman | raw"),
    real_param("absorber_width", "0", "width of the absorbing layer at each box end (0: none)"),
    real_param("absorber_strength", "0", "absorbing rate at the box edge"),
    natural_param("max_paths", "16777216", "enumeration budget"),
};

const std::vector<ParamSpec> fermat_point_specs = {
    real_param("ax", "0", "start point x (upper medium)"),
    real_param("ay", "1", "start point y"),
    real_param("bx", "1", "end point x (lower medium)"),
    real_param("by", "-1", "end point y"),
    real_param("interface_y", "0", "interface line y"),
};

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> experiments = {
      {"sample",
       {text_param("distribution", "gaussian", "gaussian (|psi|^2 of a Gaussian envelope) | uniform"),
        real_param("r_lo", "-6", "support lower edge"), real_param("r_hi", "6", "support upper edge"),
        real_param("mu", "0", "envelope centre"), real_param("sigma", "1", "envelope width"),
        natural_param("count", "100000", "number of draws"),
        natural_param("bins", "20", "histogram bins"),
        natural_param("unit_index", "0", "countable coordinate of the sampled point")},
       true, run_sample},
      {"interfere",
       {real_param("A1", "1", "envelope value at the first point"),
        real_param("n1", "0", "countable coordinate at the first point"),
        real_param("A2", "1", "envelope value at the second point"),
        real_param("n2", "0", "countable coordinate at the second point"),
        natural_param("table_points", "0", "rows of the optional amplitude table"),
        real_param("wavenumber", "0", "n(r) = n1 + wavenumber * r in the table"),
        real_param("mu", "0", "table envelope centre"),
        real_param("sigma", "1", "table envelope width")},
       false, run_interfere},
      {"pathsum",
       concat(lattice_specs({{"t_a", "0"}, {"h", "1"}, {"lagrangian", "free"}, {"omega", "1"}}),
              {natural_param("paths", "16", "random comparison paths")}),
       true, run_pathsum},
      {"propagate",
       concat(concat(lattice_specs({{"t_a", "0"}, {"h", "1"}, {"lagrangian", "free"},
                                    {"omega", "1"}}),
                     {text_param("method", "transfer", "transfer | bruteforce"),
                      text_param("cross_check", "auto", "auto | on | off")}),
              propagator_option_specs),
       false, run_propagate},
      {"converge",
       concat({real_param("r_min", "-8", "left box edge"), real_param("r_max", "9", "right box edge"),
               real_param("a", "0", "start"), real_param("b", "1", "end"),
               real_param("t_a", "0", "initial time"), real_param("T", "1", "duration"),
               real_param("mass", std::nullopt, "particle mass"),
               real_param("h", "6.283185307179586", "phase quantum (default: hbar = 1)"),
               list_param("ks", "8,16,32,64,128", "refinement sequence of slice counts"),
               real_param("grid_ratio", "3", "epsilon / delta_r, held fixed across the sequence"),
               natural_param("min_sites", "401", "smallest admissible grid")},
              {text_param("normalization", "feynman", "feynman | raw"),
               real_param("absorber_width", "4", "width of the absorbing layer at each box end"),
               real_param("absorber_strength", "50", "absorbing rate at the box edge"),
               natural_param("max_paths", "16777216", "unused; accepted for symmetry")}),
       false, run_converge},
      {"concentrate",
       concat(without(lattice_specs({{"t_a", "0"}, {"lagrangian", "free"}, {"omega", "1"}}), "h"),
              {list_param("h_values", "4,2,1,0.5,0.25", "strictly descending phase quanta"),
               real_param("delta", "0.5", "window above m_min, in winding units"),
               natural_param("max_paths", "4194304", "enumeration budget")}),
       false, run_concentrate},
      {"fermat",
       concat({real_param("v1", "1", "upper speed"),
               real_param("v2_lo", "0.5", "first lower speed of the sweep"),
               real_param("v2_hi", "1", "last lower speed of the sweep"),
               natural_param("v2_steps", "11", "number of lower speeds"),
               real_param("tol", "1e-9", "golden-section bracket tolerance")},
              fermat_point_specs),
       false, run_fermat},
      {"speedbound",
       concat({real_param("v1", "1", "upper speed"), real_param("v2", "0.5", "lower speed"),
               natural_param("paths", "1000", "sampled comparison paths"),
               natural_param("max_bends", "2", "bends per half of a sampled path")},
              fermat_point_specs),
       true, run_speedbound},
  };
  return experiments;
}

const Experiment* find_experiment(const std::string& name) {
  for (const auto& e : registry()) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

/// Validation (dry) or a full run.
RunResult execute(const ExperimentConfig& config, bool dry_run) {
  RunResult result;
  const Experiment* experiment = find_experiment(config.experiment);
  if (!experiment) {
    result.diagnostics.push_back(
        {DiagnosticKind::validation, "experiment", "unknown experiment `" + config.experiment + "`"});
    result.exit_code = exit_validation;
    return result;
  }
  if (experiment->needs_seed && !config.seed) {
    result.diagnostics.push_back({DiagnosticKind::validation, "seed",
                                  "stochastic experiment needs an explicit seed (--seed)"});
  }

  const auto started = std::chrono::steady_clock::now();
  Context ctx(config, experiment->specs, result.diagnostics, dry_run);
  ctx.out = config.out.empty() ? default_out(config.experiment, config.format) : config.out;
  try {
    experiment->body(ctx);
  } catch (const CapacityError& e) {
    result.diagnostics.push_back({DiagnosticKind::capacity, "m_sites", e.what()});
  } catch (const InvalidInput& e) {
    result.diagnostics.push_back({DiagnosticKind::validation, config.experiment, e.what()});
  } catch (const DivisionByZero& e) {
    result.diagnostics.push_back({DiagnosticKind::validation, config.experiment, e.what()});
  } catch (const std::runtime_error& e) {
    result.diagnostics.push_back({DiagnosticKind::validation, "out", e.what()});
  }

  result.warnings = ctx.warnings;
  if (!result.diagnostics.empty()) {
    const bool capacity = std::any_of(result.diagnostics.begin(), result.diagnostics.end(),
                                      [](const Diagnostic& d) {
                                        return d.kind == DiagnosticKind::capacity;
                                      });
    result.exit_code = capacity ? exit_capacity : exit_validation;
    return result;
  }
  if (dry_run) return result;

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json manifest = {
      {"experiment", config.experiment},
      {"library_version", PATHLAB_VERSION},
      {"params", ctx.params.resolved()},
      {"seed", config.seed ? json(*config.seed) : json(nullptr)},
      {"out", ctx.out},
      {"format", config.format == Format::csv ? "csv" : "json"},
      {"threads", config.threads},
      {"artifacts", ctx.artifacts},
      {"warnings", ctx.warnings},
      {"results", ctx.results},
      {"timing", {{"elapsed_seconds", elapsed}}},
  };
  const std::string manifest_path = ctx.out + ".manifest.json";
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) {
    result.diagnostics.push_back(
        {DiagnosticKind::validation, "out", "cannot write manifest `" + manifest_path + "`"});
    result.exit_code = exit_validation;
    return result;
  }
  out << manifest.dump(2) << '\n';
  result.artifacts = ctx.artifacts;
  result.artifacts.push_back(manifest_path);
  return result;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& e : registry()) n.push_back(e.name);
    return n;
  }();
  return names;
}

const std::vector<ParamSpec>& parameter_specs(const std::string& experiment) {
  static const std::vector<ParamSpec> none;
  const Experiment* e = find_experiment(experiment);
  return e ? e->specs : none;
}

std::vector<Diagnostic> validate(const ExperimentConfig& config) {
  return execute(config, true).diagnostics;
}

RunResult run(const ExperimentConfig& config) { return execute(config, false); }

std::string sibling_path(const std::string& out, const std::string& tag) {
  const auto slash = out.find_last_of('/');
  const auto dot = out.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return out + "." + tag;
  }
  return out.substr(0, dot) + "." + tag + out.substr(dot);
}

std::string default_out(const std::string& experiment, Format format) {
  return experiment + (format == Format::csv ? ".csv" : ".json");
}

}  // namespace pathlab::cli
