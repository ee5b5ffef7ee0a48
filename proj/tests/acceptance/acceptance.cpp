// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "experiments.hpp"
#include "json.hpp"
#include "pathlab/amplitude.hpp"
#include "pathlab/classical_limit.hpp"
#include "pathlab/intermediate_set.hpp"
#include "pathlab/pathsum.hpp"
#include "pathlab/propagator.hpp"
#include "pathlab/rng.hpp"

using namespace pathlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}


std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("pathlab_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Outcome born_interference() {
  Rng rng(101);
  const Interval line{-5.0, 5.0};
  const auto env = Envelope::gaussian(0.0, 1.0, line);
  double worst_union = 0.0, worst_additive = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Amplitude psi = eval_psi(env, rng.uniform(-10.0, 10.0), rng.uniform(-4.0, 4.0));
    const Amplitude pair[] = {psi, psi};
    const double p = born(psi);
    worst_union = std::max(worst_union, std::abs(born(superpose(pair)) / p - 4.0));
    worst_additive = std::max(worst_additive, std::abs((p + p) / p - 2.0));
  }
  return {worst_union <= 1e-12 && worst_additive <= 1e-12,
          "max |P_union/P - 4| = " + fmt(worst_union) + ", additive ratio 2"};
}

Outcome phase_covariance() {
  Rng rng(202);
  const Interval line{-5.0, 5.0};
  const auto env = Envelope::gaussian(0.3, 1.2, line);
  double worst = 0.0;
  bool integer_exact = true;
  for (int i = 0; i < 1000; ++i) {
    const double n = rng.uniform(-100.0, 100.0);
    const double c = rng.uniform(-10.0, 10.0);
    const double r = rng.uniform(-5.0, 5.0);
    const Amplitude lhs = eval_psi(env, n + c, r);
    const Amplitude rhs = phase_shift(eval_psi(env, n, r), c);
    worst = std::max({worst, std::abs(lhs.real() - rhs.real()), std::abs(lhs.imag() - rhs.imag())});
    const double m = std::round(c);
    integer_exact &= phase_shift(eval_psi(env, n, r), m) == eval_psi(env, n, r);
  }
  return {worst <= 1e-12 && integer_exact,
          "max componentwise diff = " + fmt(worst) + ", integer shifts exact"};
}

Outcome telescoping() {
  Rng rng(303);
  const auto sg = make_space_grid(-2.0, 2.0, 9);
  const auto env = Envelope::gaussian(0.2, 0.9, {-2.0, 2.0});
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto path = random_path(sg, 6, rng.below(9), rng.below(9), rng);
    const double direct = path_probability(path, env, sg);
    const double product = path_conditional_product(path, env, sg);
    worst = std::max(worst, std::abs(product - direct) / direct);
  }
  return {worst <= 1e-12, "max relative diff = " + fmt(worst) + " over 100 paths"};
}

Outcome oracle_equivalence() {
  Rng rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t sites = 3 + rng.below(7);
    const std::size_t k = 1 + rng.below(5);
    const double mass = rng.uniform(0.5, 2.0);
    const bool harmonic = trial % 2 == 1;
    const double omega = rng.uniform(0.2, 2.0);
    const auto L = harmonic ? harmonic_oscillator(mass, omega) : free_particle(mass);
    const auto h = make_phase_quantum(rng.uniform(0.5, 3.0));
    const auto tg = make_partition(0.0, rng.uniform(0.5, 2.0), k);
    const double half = rng.uniform(0.8, 2.0);
    const auto sg = make_space_grid(-half, half, sites);
    const std::size_t i_a = rng.below(sites), i_b = rng.below(sites);
    const auto brute = propagator_bruteforce(i_a, i_b, tg, sg, L, h).kernel;
    const auto transfer = propagator_transfer(i_a, i_b, tg, sg, L, h).kernel;
    worst = std::max({worst, std::abs(brute.real() - transfer.real()),
                      std::abs(brute.imag() - transfer.imag())});
  }
  return {worst <= 1e-10, "max componentwise diff = " + fmt(worst) + " over 20 instances"};
}

Outcome continuum_convergence() {
  cli::ExperimentConfig c;
  c.experiment = "converge";
  c.out = (scratch() / "converge.csv").string();
  c.params = {{"mass", "1"}};
  const auto result = cli::run(c);
  if (result.exit_code != cli::exit_ok) return {false, "converge experiment failed to run"};
  const auto manifest = nlohmann::json::parse(slurp(c.out + ".manifest.json"));

  std::istringstream csv(slurp(c.out));
  std::string line;
  std::getline(csv, line);
  std::vector<double> abs_err, phase_err;
  std::string sites;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    abs_err.push_back(std::stod(cells[7]));
    phase_err.push_back(std::stod(cells[8]));
    sites += (sites.empty() ? "" : "/") + cells[1];
  }
  bool abs_monotone = true, phase_monotone = true;
  std::string trace;
  for (std::size_t i = 0; i < abs_err.size(); ++i) {
    if (i > 0) {
      abs_monotone &= abs_err[i] < abs_err[i - 1];
      phase_monotone &= phase_err[i] < phase_err[i - 1];
    }
    trace += (i ? " " : "") + fmt(abs_err[i]) + "|" + fmt(phase_err[i]);
  }
  const double final_err = abs_err.back();
  const bool pass = abs_monotone && phase_monotone && final_err < 0.02 &&
                    manifest["results"]["abs_err_monotone"] == abs_monotone;
  return {pass, "k=8..128 sites " + sites + ", |K| rel err|phase err: " + trace +
                    "; |K| monotone=" + (abs_monotone ? "yes" : "no") +
                    ", phase monotone=" + (phase_monotone ? "yes" : "no") +
                    ", final |K| err " + fmt(final_err) + " (< 0.02 " +
                    (final_err < 0.02 ? "yes" : "no") + ")"};
}

Outcome least_m_optimality() {
  const auto h = make_phase_quantum(1.0);
  std::size_t instances = 0, mismatches = 0;
  for (const auto& L : {free_particle(1.0), harmonic_oscillator(1.0, 2.0)}) {
    for (std::size_t sites = 2; sites <= 9; ++sites) {
      for (std::size_t k = 1; k <= 5; ++k) {
        const auto tg = make_partition(0.0, 1.0, k);
        const auto sg = make_space_grid(-1.0, 1.0, sites);
        for (std::size_t a = 0; a < sites; ++a) {
          for (std::size_t b = 0; b < sites; ++b) {
            double best = std::numeric_limits<double>::infinity();
            std::vector<LatticePath> minimizers;
            for_each_path(sg, k, a, b, UINT64_MAX, [&](const LatticePath& p) {
              const double m = path_winding(p, L, h, tg, sg);
              if (m < best) {
                best = m;
                minimizers.assign(1, p);
              } else if (m == best) {
                minimizers.push_back(p);
              }
            });
            const auto dp = least_winding_path(L, h, tg, sg, a, b);
            const bool same_path =
                std::find(minimizers.begin(), minimizers.end(), dp.path) != minimizers.end();
            const bool unique_ok = minimizers.size() > 1 || dp.path == minimizers.front();
            if (dp.m_min != best || !same_path || !unique_ok) ++mismatches;
            ++instances;
          }
        }
      }
    }
  }
  return {mismatches == 0, std::to_string(instances) + " instances, " +
                               std::to_string(mismatches) + " mismatches"};
}

Outcome classical_emergence() {
  const auto L = free_particle(1.0);
  const auto tg = make_partition(0.0, 1.5, 4);
  const auto sg = make_space_grid(-0.3, 0.3, 7);
  const std::vector<double> hs{4.0, 2.0, 1.0, 0.5, 0.25};
  const auto curve = phase_concentration(L, tg, sg, sg.index_of(-0.1), sg.index_of(0.1), hs, 0.5);
  bool increasing = true;
  std::string trace;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i > 0) increasing &= curve[i].rho > curve[i - 1].rho;
    trace += (i ? " " : "") + fmt(curve[i].rho);
  }
  return {increasing, "rho(h=4,2,1,0.5,0.25) = " + trace};
}

Outcome snell_fermat() {
  Rng rng(808);
  double worst_residual = 0.0, worst_offset = 0.0;
  bool below_grid = true;
  constexpr std::size_t grid = 1000000;
  for (int trial = 0; trial < 50; ++trial) {
    const MediumProfile media{rng.uniform(0.2, 5.0), rng.uniform(0.2, 5.0), rng.uniform(-1.0, 1.0)};
    const Point2 a{rng.uniform(-2.0, 2.0), media.interface_y + rng.uniform(0.2, 3.0)};
    Point2 b{rng.uniform(-2.0, 2.0), media.interface_y - rng.uniform(0.2, 3.0)};
    if (std::abs(b.x - a.x) < 0.2) b.x = a.x + (b.x >= a.x ? 0.2 : -0.2);
    const auto sol = fermat_minimize(media, a, b);
    const auto snell = snell_check(media, a, b, sol.crossing);
    worst_residual = std::max(worst_residual, snell.residual);

    const double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
    double best_x = lo, best_t = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= grid; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / grid;
      const double t = fermat_travel_time(media, a, b, x);
      if (t < best_t) {
        best_t = t;
        best_x = x;
      }
    }
    worst_offset = std::max(worst_offset, std::abs(sol.crossing - best_x) / ((hi - lo) / grid));
    below_grid &= sol.time <= best_t + 1e-15;
  }
  return {worst_residual < 1e-6 && worst_offset <= 1.0 && below_grid,
          "max Snell residual = " + fmt(worst_residual) +
              ", max |x_golden - x_grid| = " + fmt(worst_offset) + " grid spacings"};
}

Outcome speed_bound() {
  const MediumProfile media{1.0, 0.5, 0.0};
  const Point2 a{0.0, 1.0}, b{1.0, -1.0};
  Rng rng(909);
  const auto paths = sample_admissible_paths(media, a, b, 1000, rng);
  const auto report = speed_bound_check(media, a, b, paths, 1e-12);
  return {report.violations == 0 && report.min_path_time >= report.time_star - 1e-12 &&
              paths.size() == 1000,
          "time* = " + fmt(report.time_star) + ", min sampled time = " +
              fmt(report.min_path_time) + ", violations " + std::to_string(report.violations)};
}

Outcome sampling_fidelity() {
  const Interval support{-6.0, 6.0};
  const auto env = Envelope::gaussian(0.0, 1.0, support);
  const auto dist = MappingDistribution::from_density(
      support, [&](double r) { return born(eval_psi(env, 2.5 * r, r)); });
  const auto draws = sample_images({7, 0}, dist, 100000, 1010);
  const std::size_t bins = 40;
  const auto hist = empirical_density(draws, bins, support);
  const double total = normal_cdf(6.0) - normal_cdf(-6.0);
  std::vector<double> exact(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    exact[i] = (normal_cdf(hist.edges[i + 1]) - normal_cdf(hist.edges[i])) / total;
  }
  const double tv = total_variation(hist.frequencies, exact);
  return {tv < 0.02, "total variation = " + fmt(tv) + " over 40 bins"};
}

Outcome determinism() {
  const std::pair<std::string, std::map<std::string, std::string>> cases[] = {
      {"sample", {}},
      {"interfere", {{"n2", "0.2"}, {"table_points", "101"}, {"wavenumber", "1.5"}}},
      {"pathsum",
       {{"m_sites", "9"}, {"k", "5"}, {"mass", "1"}, {"T", "1"}, {"r_min", "-1"}, {"r_max", "1"},
        {"a", "0"}, {"b", "0.5"}}},
      {"propagate",
       {{"m_sites", "7"}, {"k", "4"}, {"mass", "1"}, {"T", "1"}, {"r_min", "-1.5"},
        {"r_max", "1.5"}, {"a", "0"}, {"b", "0.5"}}},
      {"converge", {{"mass", "1"}, {"ks", "8,16"}}},
      {"concentrate",
       {{"m_sites", "7"}, {"k", "4"}, {"mass", "1"}, {"T", "1.5"}, {"r_min", "-0.3"},
        {"r_max", "0.3"}, {"a", "-0.1"}, {"b", "0.1"}}},
      {"fermat", {}},
      {"speedbound", {}},
  };
  std::size_t files = 0;
  std::string failed;
  for (const auto& [name, params] : cases) {
    cli::ExperimentConfig c;
    c.experiment = name;
    c.params = params;
    c.seed = 20240;
    c.out = (scratch() / (name + "_first.csv")).string();
    const auto first = cli::run(c);
    c.out = (scratch() / (name + "_second.csv")).string();
    const auto second = cli::run(c);
    if (first.exit_code != cli::exit_ok || second.exit_code != cli::exit_ok ||
        first.artifacts.size() != second.artifacts.size()) {
      failed += " " + name;
      continue;
    }
    // The last artifact is the manifest, which records wall-clock timing.
    for (std::size_t i = 0; i + 1 < first.artifacts.size(); ++i) {
      ++files;
      if (slurp(first.artifacts[i]) != slurp(second.artifacts[i])) failed += " " + name;
    }
  }
  return {failed.empty(), std::to_string(files) + " CSV files compared across 8 experiments" +
                              (failed.empty() ? "" : "; differing:" + failed)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"Born interference: in-phase union is 4x single, additive 2x", born_interference},
      {"Phase covariance over 1000 seeded cases", phase_covariance},
      {"Telescoping path probability on (9 sites, k=6)", telescoping},
      {"Brute force vs transfer on 20 seeded instances", oracle_equivalence},
      {"Continuum convergence to the free-particle kernel", continuum_convergence},
      {"Least-m DP equals exhaustive minimum", least_m_optimality},
      {"Phase concentration increases as h descends", classical_emergence},
      {"Snell/Fermat on 50 seeded two-media instances", snell_fermat},
      {"Speed bound against 1000 seeded paths", speed_bound},
      {"Sampling fidelity of 1e5 draws from |psi|^2", sampling_fidelity},
      {"Byte-identical reruns of every CLI experiment", determinism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [title, check] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outcome.pass) ++failures;
    std::printf("%s criterion %d: %s -- %s [%.2f s]\n", outcome.pass ? "PASS" : "FAIL", index,
                title, outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failures, index);
  fs::remove_all(scratch());
  return failures == 0 ? 0 : 1;
}
