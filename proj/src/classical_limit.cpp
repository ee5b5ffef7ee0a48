#include "pathlab/classical_limit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pathlab/csv.hpp"
#include "pathlab/errors.hpp"
#include "pathlab/propagator.hpp"

namespace pathlab {

StationaryPathResult least_winding_path(const LagrangianModel& lagrangian, PhaseQuantum quantum,
                                        const TimeGrid& tgrid, const SpaceGrid& sgrid,
                                        std::size_t i_a, std::size_t i_b) {
  if (i_a >= sgrid.sites || i_b >= sgrid.sites) throw InvalidInput("endpoint beyond the grid");
  const std::size_t n = sgrid.sites;
  const std::size_t k = tgrid.steps;
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

  std::vector<double> best(n, inf), second(n, inf);
  best[i_a] = 0.0;
  // pred[i][j]: predecessor of site j at node i on the best path.
  std::vector<std::vector<std::size_t>> pred(k + 1, std::vector<std::size_t>(n, none));

  std::vector<double> next_best(n), next_second(n);
  for (std::size_t i = 1; i <= k; ++i) {
    const double t_mid = tgrid.midpoint(i);
    std::fill(next_best.begin(), next_best.end(), inf);
    std::fill(next_second.begin(), next_second.end(), inf);
    const std::size_t to_lo = i == k ? i_b : 0;
    const std::size_t to_hi = i == k ? i_b + 1 : n;
    for (std::size_t to = to_lo; to < to_hi; ++to) {
      const double r_to = sgrid.position(to);
      double b1 = inf, b2 = inf;
      std::size_t arg = none;
      for (std::size_t from = 0; from < n; ++from) {
        if (best[from] == inf) continue;
        const double dn = step_increment(lagrangian, quantum, sgrid.position(from), r_to, t_mid,
                                         tgrid.epsilon);
        const double c1 = best[from] + dn;
        const double c2 = second[from] + dn;
        if (c1 < b1) {
          b2 = std::min(b1, c2);
          b1 = c1;
          arg = from;
        } else {
          b2 = std::min({b2, c1, c2});
        }
      }
      next_best[to] = b1;
      next_second[to] = b2;
      pred[i][to] = arg;
    }
    std::swap(best, next_best);
    std::swap(second, next_second);
  }

  StationaryPathResult result;
  result.m_min = best[i_b];
  result.runner_up_gap = second[i_b] - best[i_b];
  result.path.sites.assign(k + 1, 0);
  result.path.sites[k] = i_b;
  for (std::size_t i = k; i >= 1; --i) result.path.sites[i - 1] = pred[i][result.path.sites[i]];
  return result;
}

std::vector<ConcentrationPoint> phase_concentration(const LagrangianModel& lagrangian,
                                                    const TimeGrid& tgrid,
                                                    const SpaceGrid& sgrid, std::size_t i_a,
                                                    std::size_t i_b,
                                                    std::span<const double> h_values,
                                                    double delta, std::uint64_t max_paths) {
  if (!(delta > 0.0)) throw InvalidInput("concentration window needs delta > 0");
  if (h_values.empty()) throw InvalidInput("concentration sweep needs at least one h");
  for (std::size_t i = 0; i < h_values.size(); ++i) {
    make_phase_quantum(h_values[i]);
    if (i > 0 && !(h_values[i] < h_values[i - 1])) {
      throw InvalidInput("concentration sweep needs strictly descending h values");
    }
  }
  const auto paths = enumerate_paths(sgrid, tgrid.steps, i_a, i_b, max_paths);

  std::vector<ConcentrationPoint> curve;
  std::vector<double> m(paths.size());
  for (double h : h_values) {
    const PhaseQuantum quantum{h};
    for (std::size_t p = 0; p < paths.size(); ++p) {
      m[p] = path_winding(paths[p], lagrangian, quantum, tgrid, sgrid);
    }
    const double m_min = *std::min_element(m.begin(), m.end());
    Amplitude window = 0.0, total = 0.0;
    std::uint64_t inside = 0;
    for (double mp : m) {
      const Amplitude z = unit_phase(mp);
      total += z;
      if (mp <= m_min + delta) {
        window += z;
        ++inside;
      }
    }
    curve.push_back({h, std::abs(window) / std::abs(total), m_min, inside, paths.size()});
  }
  return curve;
}

void write_concentration_csv(std::ostream& out, std::span<const ConcentrationPoint> curve) {
  out << "h,rho,m_min,paths_in_window,total_paths\n";
  for (const auto& c : curve) csv::row(out, c.h, c.rho, c.m_min, c.paths_in_window, c.total_paths);
}

double constant_rate_winding(RateModel rate, const TimeGrid& tgrid) {
  if (!(rate.nu > 0.0)) throw InvalidInput("rate model needs nu > 0");
  double m = 0.0;
  for (std::size_t i = 1; i <= tgrid.steps; ++i) m += rate.nu * tgrid.epsilon;
  return m;
}

double distance(Point2 a, Point2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

SpeedProfile1D::SpeedProfile1D(std::vector<double> breakpoints, std::vector<double> speeds)
    : breakpoints_(std::move(breakpoints)), speeds_(std::move(speeds)) {
  if (speeds_.empty() || breakpoints_.size() != speeds_.size() + 1) {
    throw InvalidInput("speed profile needs one more breakpoint than speeds");
  }
  for (std::size_t i = 0; i < speeds_.size(); ++i) {
    if (!(breakpoints_[i + 1] > breakpoints_[i])) {
      throw InvalidInput("speed profile breakpoints must increase");
    }
    if (!(speeds_[i] > 0.0) || !std::isfinite(speeds_[i])) {
      throw InvalidInput("speeds must be positive and finite");
    }
  }
}

double SpeedProfile1D::speed_at(double r) const {
  if (r < breakpoints_.front() || r > breakpoints_.back()) {
    throw InvalidInput("position outside the speed profile");
  }
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), r);
  auto i = static_cast<std::size_t>(it - breakpoints_.begin());
  return speeds_[std::min(i, speeds_.size()) - 1];
}

double SpeedProfile1D::travel_time(double a, double b) const {
  if (a > b) std::swap(a, b);
  if (a < breakpoints_.front() || b > breakpoints_.back()) {
    throw InvalidInput("travel interval outside the speed profile");
  }
  double time = 0.0;
  for (std::size_t i = 0; i < speeds_.size(); ++i) {
    const double lo = std::max(a, breakpoints_[i]);
    const double hi = std::min(b, breakpoints_[i + 1]);
    if (hi > lo) time += (hi - lo) / speeds_[i];
  }
  return time;
}

void validate(const MediumProfile& profile) {
  for (double v : {profile.upper, profile.lower}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("speeds must be positive and finite");
  }
  if (!std::isfinite(profile.interface_y)) throw InvalidInput("interface must be finite");
}

double fermat_travel_time(const MediumProfile& profile, Point2 a, Point2 b, double crossing) {
  validate(profile);
  const Point2 c{crossing, profile.interface_y};
  return distance(a, c) / profile.speed_at(a) + distance(c, b) / profile.speed_at(b);
}

double golden_section_search(const std::function<bool(double, double)>& less, double lo,
                             double hi, double abs_tol) {
  if (lo > hi) std::swap(lo, hi);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  while (hi - lo > abs_tol) {
    if (less(c, d)) {
      hi = d;
      d = c;
      c = hi - inv_phi * (hi - lo);
    } else {
      lo = c;
      c = d;
      d = lo + inv_phi * (hi - lo);
    }
  }
  return 0.5 * (lo + hi);
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double abs_tol) {
  return golden_section_search([&](double x, double y) { return f(x) < f(y); }, lo, hi, abs_tol);
}

namespace {

void check_opposite_sides(const MediumProfile& profile, Point2 a, Point2 b) {
  const double y0 = profile.interface_y;
  if (!((a.y >= y0 && b.y <= y0) || (a.y <= y0 && b.y >= y0))) {
    throw InvalidInput("fermat endpoints must lie on opposite sides of the interface");
  }
}

}  // namespace

FermatSolution fermat_minimize(const MediumProfile& profile, Point2 a, Point2 b,
                               double abs_tol) {
  validate(profile);
  check_opposite_sides(profile, a, b);
  const double y0 = profile.interface_y;
  const double va = profile.speed_at(a), vb = profile.speed_at(b);
  // |p - (x1, y0)| - |p - (x2, y0)| without cancellation.
  auto leg_difference = [y0](Point2 p, double x1, double x2) {
    const double d1 = std::hypot(x1 - p.x, y0 - p.y);
    const double d2 = std::hypot(x2 - p.x, y0 - p.y);
    return d1 + d2 == 0.0 ? 0.0 : (x1 - x2) * (x1 + x2 - 2.0 * p.x) / (d1 + d2);
  };
  auto faster = [&](double x1, double x2) {
    return leg_difference(a, x1, x2) / va + leg_difference(b, x1, x2) / vb < 0.0;
  };
  const double lo = std::min(a.x, b.x);
  const double hi = std::max(a.x, b.x);
  const double x = lo == hi ? lo : golden_section_search(faster, lo, hi, abs_tol);
  return {x, fermat_travel_time(profile, a, b, x)};
}

SnellReport snell_check(const MediumProfile& profile, Point2 a, Point2 b, double crossing) {
  validate(profile);
  const Point2 c{crossing, profile.interface_y};
  const double sin_a = std::abs(c.x - a.x) / distance(a, c);
  const double sin_b = std::abs(b.x - c.x) / distance(c, b);
  SnellReport report;
  report.sin_ratio = sin_a / sin_b;
  report.speed_ratio = profile.speed_at(a) / profile.speed_at(b);
  report.residual = std::abs(report.sin_ratio - report.speed_ratio);
  return report;
}

void write_fermat_header(std::ostream& out) {
  out << "v1,v2,crossing,time,sin_ratio,speed_ratio,residual\n";
}

void write_fermat_row(std::ostream& out, const MediumProfile& profile,
                      const FermatSolution& solution, const SnellReport& snell) {
  csv::row(out, profile.upper, profile.lower, solution.crossing, solution.time, snell.sin_ratio,
           snell.speed_ratio, snell.residual);
}

double polyline_travel_time(const MediumProfile& profile, const Polyline& path) {
  validate(profile);
  if (path.vertices.size() < 2) throw InvalidInput("a path needs at least two vertices");
  const double y0 = profile.interface_y;
  double time = 0.0;
  for (std::size_t i = 1; i < path.vertices.size(); ++i) {
    const Point2 p = path.vertices[i - 1];
    const Point2 q = path.vertices[i];
    const bool upper = p.y >= y0 && q.y >= y0;
    const bool lower = p.y <= y0 && q.y <= y0;
    double speed = 0.0;
    if (upper && lower) {
      speed = std::max(profile.upper, profile.lower);
    } else if (upper) {
      speed = profile.upper;
    } else if (lower) {
      speed = profile.lower;
    } else {
      throw InvalidInput("inadmissible path: segment " + std::to_string(i) +
                         " crosses the interface without a vertex on it");
    }
    time += distance(p, q) / speed;
  }
  return time;
}

std::vector<Polyline> sample_admissible_paths(const MediumProfile& profile, Point2 a, Point2 b,
                                              std::size_t count, Rng& rng,
                                              std::size_t max_bends) {
  validate(profile);
  check_opposite_sides(profile, a, b);
  const double y0 = profile.interface_y;
  const double span = std::max(std::abs(b.x - a.x), 1.0);
  const double x_lo = std::min(a.x, b.x) - span;
  const double x_hi = std::max(a.x, b.x) + span;
  // Side of a: +1 above the interface, -1 below.
  const double side_a = a.y >= y0 ? 1.0 : -1.0;
  const double reach_a = 2.0 * std::abs(a.y - y0) + 1.0;
  const double reach_b = 2.0 * std::abs(b.y - y0) + 1.0;

  std::vector<Polyline> paths(count);
  for (auto& path : paths) {
    path.vertices.push_back(a);
    const auto bends_a = rng.below(max_bends + 1);
    for (std::uint64_t i = 0; i < bends_a; ++i) {
      path.vertices.push_back({rng.uniform(x_lo, x_hi), y0 + side_a * rng.uniform() * reach_a});
    }
    path.vertices.push_back({rng.uniform(x_lo, x_hi), y0});
    const auto bends_b = rng.below(max_bends + 1);
    for (std::uint64_t i = 0; i < bends_b; ++i) {
      path.vertices.push_back({rng.uniform(x_lo, x_hi), y0 - side_a * rng.uniform() * reach_b});
    }
    path.vertices.push_back(b);
  }
  return paths;
}

SpeedBoundReport speed_bound_check(const MediumProfile& profile, Point2 a, Point2 b,
                                   std::span<const Polyline> paths, double tolerance) {
  const FermatSolution best = fermat_minimize(profile, a, b);
  const double length = distance(a, b);
  SpeedBoundReport report;
  report.time_star = best.time;
  report.bound_speed = best.time > 0.0 ? length / best.time : 0.0;
  report.path_times.reserve(paths.size());
  for (const auto& path : paths) {
    if (path.vertices.empty() || distance(path.vertices.front(), a) > 1e-12 ||
        distance(path.vertices.back(), b) > 1e-12) {
      throw InvalidInput("inadmissible path: endpoints differ from a and b");
    }
    const double t = polyline_travel_time(profile, path);
    report.path_times.push_back(t);
    report.min_path_time = std::min(report.min_path_time, t);
    if (t > 0.0) report.max_path_speed = std::max(report.max_path_speed, length / t);
    if (t < best.time - tolerance) ++report.violations;
  }
  return report;
}

}  // namespace pathlab
