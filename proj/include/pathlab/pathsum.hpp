#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pathlab/amplitude.hpp"

namespace pathlab {

/// Equal partition of [t_a, t_b] into `steps` slices.
struct TimeGrid {
  double t_a = 0.0;
  double t_b = 1.0;
  std::size_t steps = 1;
  double epsilon = 1.0;

  double duration() const { return t_b - t_a; }
  double node(std::size_t i) const {
    return i == steps ? t_b : t_a + static_cast<double>(i) * epsilon;
  }
  /// Temporal midpoint of slice i (1-based, i in [1, steps]).
  double midpoint(std::size_t i) const {
    return t_a + (static_cast<double>(i) - 0.5) * epsilon;
  }
};

/// Throws InvalidInput unless t_b > t_a and k >= 1.
TimeGrid make_partition(double t_a, double t_b, std::size_t k);

/// Equally spaced sites r_min + j*delta_r, j in [0, sites).
struct SpaceGrid {
  double r_min = 0.0;
  double r_max = 1.0;
  std::size_t sites = 2;
  double delta_r = 1.0;

  double position(std::size_t j) const {
    return j + 1 == sites ? r_max : r_min + static_cast<double>(j) * delta_r;
  }
  /// Index of the site at r; throws InvalidInput if r is not a site (to 1e-9 of delta_r).
  std::size_t index_of(double r) const;
};

/// Throws InvalidInput unless r_max > r_min and sites >= 2.
SpaceGrid make_space_grid(double r_min, double r_max, std::size_t sites);

/// Site indices r_0..r_k; the endpoints are fixed by the caller.
struct LatticePath {
  std::vector<std::size_t> sites;

  std::size_t steps() const { return sites.empty() ? 0 : sites.size() - 1; }
  friend bool operator==(const LatticePath&, const LatticePath&) = default;
  friend auto operator<=>(const LatticePath&, const LatticePath&) = default;
};

/// L(r, rdot, t) with the metadata the propagator needs.
///
/// `mass` feeds the per-step normalization. `time_independent` and
/// `translation_invariant` let the transfer method reuse one slice kernel
/// and store it as a displacement table; they must be honest.
struct LagrangianModel {
  std::string name;
  double mass = 1.0;
  bool time_independent = true;
  bool translation_invariant = false;
  std::function<double(double r, double rdot, double t)> fn;

  double operator()(double r, double rdot, double t) const { return fn(r, rdot, t); }
};

LagrangianModel free_particle(double mass);
/// mass*rdot^2/2 - mass*omega^2*r^2/2.
LagrangianModel harmonic_oscillator(double mass, double omega);
/// L + c: every path's action shifts by c*(t_b - t_a).
LagrangianModel with_offset(LagrangianModel base, double c);
/// s*L; the mass metadata scales with it.
LagrangianModel scaled(LagrangianModel base, double s);

/// Unit of action relating winding to action: h*m = integral of L dt, hbar = h/(2 pi).
struct PhaseQuantum {
  double h = 1.0;

  double hbar() const;
};

/// Throws InvalidInput unless h > 0 and finite.
PhaseQuantum make_phase_quantum(double h);

/// Winding increment of one slice: epsilon * L(midpoint, forward difference, t_mid) / h.
double step_increment(const LagrangianModel& lagrangian, PhaseQuantum quantum, double r_prev,
                      double r_next, double t_mid, double epsilon);

/// m = sum of step increments along the path, accumulated from the first step.
/// Throws InvalidInput if the path does not fit the grids.
double path_winding(const LatticePath& path, const LagrangianModel& lagrangian,
                    PhaseQuantum quantum, const TimeGrid& tgrid, const SpaceGrid& sgrid);

/// norm_const * e^{2 pi i m(path)}.
Amplitude path_amplitude(const LatticePath& path, const LagrangianModel& lagrangian,
                         PhaseQuantum quantum, const TimeGrid& tgrid, const SpaceGrid& sgrid,
                         Amplitude norm_const);

/// p_next / p_prev. Throws DivisionByZero when p_prev == 0 and InvalidInput on
/// negative arguments.
double step_conditional_probability(double p_prev, double p_next);

/// (A(r_k) / A(r_0))^2. Does not depend on interior sites or on the winding.
double path_probability(const LatticePath& path, const Envelope& envelope,
                        const SpaceGrid& sgrid);

/// Product over steps of step_conditional_probability(A(r_{i-1})^2, A(r_i)^2).
double path_conditional_product(const LatticePath& path, const Envelope& envelope,
                                const SpaceGrid& sgrid);

/// Uniformly random interior sites with fixed endpoints.
LatticePath random_path(const SpaceGrid& sgrid, std::size_t steps, std::size_t i_a,
                        std::size_t i_b, Rng& rng);

void write_path_csv(std::ostream& out, const LatticePath& path, const TimeGrid& tgrid,
                    const SpaceGrid& sgrid);

struct WindingRecord {
  std::uint64_t path_id = 0;
  double m = 0.0;
  double action = 0.0;  // h * m
};

void write_winding_csv(std::ostream& out, std::span<const WindingRecord> records);

}  // namespace pathlab
