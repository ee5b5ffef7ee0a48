#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pathlab/amplitude.hpp"
#include "pathlab/pathsum.hpp"

namespace pathlab {

/// Per-step constant in front of each slice.
enum class Normalization {
  feynman,  ///< sqrt(mass / (2 pi i hbar epsilon)), hbar = h / (2 pi)
  raw,      ///< 1, for pure interference studies
};

/// Smooth absorbing layer on the outer `width` of each end of the box.
///
/// At depth d into the layer the site carries rate strength * (d / width)^2;
/// every slice damps the amplitude at that site by exp(-rate * epsilon).
/// Without it the box walls reflect, and paths folded back from the walls
/// carry as much weight as the direct ones.
struct AbsorbingLayer {
  double width = 1.0;
  double strength = 0.0;
};

struct PropagatorOptions {
  Normalization normalization = Normalization::feynman;
  std::optional<AbsorbingLayer> absorber;
  std::uint64_t max_paths = std::uint64_t{1} << 24;
  unsigned threads = 1;
};

enum class PropagatorMethod { bruteforce, transfer };

struct PropagatorResult {
  Amplitude kernel;
  PropagatorMethod method = PropagatorMethod::transfer;
  std::uint64_t paths_summed = 0;  ///< sites^(k-1) for brute force, 0 for transfer
  Amplitude normalization_per_step;
  TimeGrid tgrid;
  SpaceGrid sgrid;
};

Amplitude step_normalization(const LagrangianModel& lagrangian, PhaseQuantum quantum,
                             double epsilon, Normalization normalization);

/// Per-slice damping factor of `site` (1 when there is no absorber).
double absorber_damping(const std::optional<AbsorbingLayer>& absorber, const SpaceGrid& sgrid,
                        std::size_t site, double epsilon);

/// sites^(steps-1), saturating at UINT64_MAX.
std::uint64_t path_count(std::size_t sites, std::size_t steps);

/// Visits every path from i_a to i_b in lexicographic order of interior
/// sites. Throws CapacityError, before visiting anything, if there are more
/// than max_paths paths.
void for_each_path(const SpaceGrid& sgrid, std::size_t steps, std::size_t i_a, std::size_t i_b,
                   std::uint64_t max_paths, const std::function<void(const LatticePath&)>& visit);

std::vector<LatticePath> enumerate_paths(const SpaceGrid& sgrid, std::size_t steps,
                                         std::size_t i_a, std::size_t i_b,
                                         std::uint64_t max_paths);

/// Explicit sum over all lattice paths:
/// N^k * delta_r^(k-1) * sum_paths e^{2 pi i m(path)} (times absorber damping).
PropagatorResult propagator_bruteforce(std::size_t i_a, std::size_t i_b, const TimeGrid& tgrid,
                                       const SpaceGrid& sgrid, const LagrangianModel& lagrangian,
                                       PhaseQuantum quantum, const PropagatorOptions& options = {});

/// One time slice as a sites x sites operator with entries
/// damping(j) * N * e^{2 pi i dn(j' -> j)} * delta_r.
///
/// Translation-invariant Lagrangians are stored as a displacement table of
/// 2*sites - 1 entries; others as a dense matrix.
class TransferKernel {
 public:
  TransferKernel(const LagrangianModel& lagrangian, PhaseQuantum quantum, const TimeGrid& tgrid,
                 std::size_t slice, const SpaceGrid& sgrid, const PropagatorOptions& options);

  std::size_t sites() const { return sites_; }
  bool is_displacement_table() const { return toeplitz_; }
  Amplitude entry(std::size_t to, std::size_t from) const;

  /// out[j] = sum over j' ascending of entry(j, j') * in[j'].
  /// Parallel over output sites; every output is summed in the same order
  /// regardless of thread count.
  void apply(std::span<const double> in_re, std::span<const double> in_im,
             std::span<double> out_re, std::span<double> out_im, unsigned threads) const;

 private:
  std::size_t sites_ = 0;
  bool toeplitz_ = false;
  std::vector<double> re_, im_;  // reversed table, or row-major dense
  std::vector<double> damping_;
};

/// Applies slices [first_slice, last_slice] (1-based, inclusive) to a state.
std::vector<Amplitude> transfer_evolve(std::vector<Amplitude> state,
                                       const LagrangianModel& lagrangian, PhaseQuantum quantum,
                                       const TimeGrid& tgrid, const SpaceGrid& sgrid,
                                       std::size_t first_slice, std::size_t last_slice,
                                       const PropagatorOptions& options = {});

/// K(a, r_j) for every site j, in the brute-force convention.
std::vector<Amplitude> transfer_row(std::size_t i_a, const TimeGrid& tgrid,
                                    const SpaceGrid& sgrid, const LagrangianModel& lagrangian,
                                    PhaseQuantum quantum, const PropagatorOptions& options = {});

/// Same sum as propagator_bruteforce, regrouped slice by slice: k
/// applications of TransferKernel to the unit vector at a, read at b,
/// divided by one trailing delta_r.
PropagatorResult propagator_transfer(std::size_t i_a, std::size_t i_b, const TimeGrid& tgrid,
                                     const SpaceGrid& sgrid, const LagrangianModel& lagrangian,
                                     PhaseQuantum quantum, const PropagatorOptions& options = {});

/// sqrt(mass / (2 pi i hbar T)) * exp(i mass (b - a)^2 / (2 hbar T)), principal root.
/// Throws InvalidInput unless T, mass, hbar are positive.
Amplitude analytic_free_particle(double a, double b, double duration, double mass, double hbar);

/// Phase of z / reference in (-pi, pi].
double phase_difference(Amplitude z, Amplitude reference);

struct PropagatorReportRow {
  std::size_t k = 0;
  std::size_t m_sites = 0;
  double epsilon = 0.0;
  Amplitude kernel;
  /// | |K| - |K_exact| | / |K_exact|; nan without an oracle.
  double abs_err_vs_oracle = 0.0;
  /// |arg(K / K_exact)|; nan without an oracle.
  double phase_err_vs_oracle = 0.0;
};

PropagatorReportRow make_report_row(const PropagatorResult& result,
                                    std::optional<Amplitude> oracle);

void write_propagator_csv(std::ostream& out, std::span<const PropagatorReportRow> rows);

}  // namespace pathlab
