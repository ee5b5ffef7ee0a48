#include "pathlab/pathsum.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "pathlab/csv.hpp"
#include "pathlab/errors.hpp"

namespace pathlab {

TimeGrid make_partition(double t_a, double t_b, std::size_t k) {
  if (k == 0) throw InvalidInput("time partition needs k >= 1 steps");
  if (!(t_b > t_a) || !std::isfinite(t_a) || !std::isfinite(t_b)) {
    throw InvalidInput("time partition needs finite t_b > t_a");
  }
  return {t_a, t_b, k, (t_b - t_a) / static_cast<double>(k)};
}

SpaceGrid make_space_grid(double r_min, double r_max, std::size_t sites) {
  if (sites < 2) throw InvalidInput("space grid needs at least 2 sites");
  if (!(r_max > r_min) || !std::isfinite(r_min) || !std::isfinite(r_max)) {
    throw InvalidInput("space grid needs finite r_max > r_min");
  }
  return {r_min, r_max, sites, (r_max - r_min) / static_cast<double>(sites - 1)};
}

std::size_t SpaceGrid::index_of(double r) const {
  const double x = (r - r_min) / delta_r;
  const double j = std::round(x);
  if (j < 0.0 || j > static_cast<double>(sites - 1) || std::abs(x - j) > 1e-9) {
    throw InvalidInput("r=" + csv::num(r) + " is not a site of the space grid");
  }
  return static_cast<std::size_t>(j);
}

LagrangianModel free_particle(double mass) {
  if (!(mass > 0.0)) throw InvalidInput("free particle needs mass > 0");
  return {"free_particle", mass, true, true,
          [mass](double, double rdot, double) { return 0.5 * mass * rdot * rdot; }};
}

LagrangianModel harmonic_oscillator(double mass, double omega) {
  if (!(mass > 0.0)) throw InvalidInput("harmonic oscillator needs mass > 0");
  const double k = mass * omega * omega;
  return {"harmonic_oscillator", mass, true, false, [mass, k](double r, double rdot, double) {
            return 0.5 * mass * rdot * rdot - 0.5 * k * r * r;
          }};
}

LagrangianModel with_offset(LagrangianModel base, double c) {
  base.name += "+const";
  base.fn = [inner = std::move(base.fn), c](double r, double rdot, double t) {
    return inner(r, rdot, t) + c;
  };
  return base;
}

LagrangianModel scaled(LagrangianModel base, double s) {
  base.name += "*scale";
  base.mass *= s;
  base.fn = [inner = std::move(base.fn), s](double r, double rdot, double t) {
    return s * inner(r, rdot, t);
  };
  return base;
}

double PhaseQuantum::hbar() const { return h / (2.0 * std::numbers::pi); }

PhaseQuantum make_phase_quantum(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput("phase quantum h must be positive");
  return {h};
}

double step_increment(const LagrangianModel& lagrangian, PhaseQuantum quantum, double r_prev,
                      double r_next, double t_mid, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidInput("step increment needs epsilon > 0");
  const double r_mid = 0.5 * (r_prev + r_next);
  const double rdot = (r_next - r_prev) / epsilon;
  return epsilon * lagrangian(r_mid, rdot, t_mid) / quantum.h;
}

namespace {

void check_path(const LatticePath& path, const TimeGrid& tgrid, const SpaceGrid& sgrid) {
  if (path.sites.size() != tgrid.steps + 1) {
    throw InvalidInput("path has " + std::to_string(path.sites.size()) + " sites; grid needs " +
                       std::to_string(tgrid.steps + 1));
  }
  for (std::size_t j : path.sites) {
    if (j >= sgrid.sites) throw InvalidInput("path site index beyond the space grid");
  }
}

void check_sites(const LatticePath& path, const SpaceGrid& sgrid) {
  if (path.sites.size() < 2) throw InvalidInput("path needs at least one step");
  for (std::size_t j : path.sites) {
    if (j >= sgrid.sites) throw InvalidInput("path site index beyond the space grid");
  }
}

}  // namespace

double path_winding(const LatticePath& path, const LagrangianModel& lagrangian,
                    PhaseQuantum quantum, const TimeGrid& tgrid, const SpaceGrid& sgrid) {
  check_path(path, tgrid, sgrid);
  double m = 0.0;
  for (std::size_t i = 1; i <= tgrid.steps; ++i) {
    m += step_increment(lagrangian, quantum, sgrid.position(path.sites[i - 1]),
                        sgrid.position(path.sites[i]), tgrid.midpoint(i), tgrid.epsilon);
  }
  return m;
}

Amplitude path_amplitude(const LatticePath& path, const LagrangianModel& lagrangian,
                         PhaseQuantum quantum, const TimeGrid& tgrid, const SpaceGrid& sgrid,
                         Amplitude norm_const) {
  return norm_const * unit_phase(path_winding(path, lagrangian, quantum, tgrid, sgrid));
}

double step_conditional_probability(double p_prev, double p_next) {
  if (p_prev < 0.0 || p_next < 0.0) throw InvalidInput("probabilities must be nonnegative");
  if (p_prev == 0.0) throw DivisionByZero("conditioning on a point of zero probability");
  return p_next / p_prev;
}

double path_probability(const LatticePath& path, const Envelope& envelope,
                        const SpaceGrid& sgrid) {
  check_sites(path, sgrid);
  const double a0 = envelope(sgrid.position(path.sites.front()));
  const double ak = envelope(sgrid.position(path.sites.back()));
  if (a0 == 0.0) throw DivisionByZero("path starts where the envelope vanishes");
  const double ratio = ak / a0;
  return ratio * ratio;
}

double path_conditional_product(const LatticePath& path, const Envelope& envelope,
                                const SpaceGrid& sgrid) {
  check_sites(path, sgrid);
  double product = 1.0;
  for (std::size_t i = 1; i < path.sites.size(); ++i) {
    const double a_prev = envelope(sgrid.position(path.sites[i - 1]));
    const double a_next = envelope(sgrid.position(path.sites[i]));
    product *= step_conditional_probability(a_prev * a_prev, a_next * a_next);
  }
  return product;
}

LatticePath random_path(const SpaceGrid& sgrid, std::size_t steps, std::size_t i_a,
                        std::size_t i_b, Rng& rng) {
  if (steps == 0) throw InvalidInput("random path needs at least one step");
  if (i_a >= sgrid.sites || i_b >= sgrid.sites) throw InvalidInput("endpoint beyond the grid");
  LatticePath path;
  path.sites.resize(steps + 1);
  path.sites.front() = i_a;
  path.sites.back() = i_b;
  for (std::size_t i = 1; i < steps; ++i) path.sites[i] = rng.below(sgrid.sites);
  return path;
}

void write_path_csv(std::ostream& out, const LatticePath& path, const TimeGrid& tgrid,
                    const SpaceGrid& sgrid) {
  check_path(path, tgrid, sgrid);
  out << "step,t,r\n";
  for (std::size_t i = 0; i < path.sites.size(); ++i) {
    csv::row(out, i, tgrid.node(i), sgrid.position(path.sites[i]));
  }
}

void write_winding_csv(std::ostream& out, std::span<const WindingRecord> records) {
  out << "path_id,m,action\n";
  for (const auto& r : records) csv::row(out, r.path_id, r.m, r.action);
}

}  // namespace pathlab
