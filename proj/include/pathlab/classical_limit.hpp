#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "pathlab/pathsum.hpp"
#include "pathlab/rng.hpp"

namespace pathlab {

struct StationaryPathResult {
  LatticePath path;
  double m_min = 0.0;
  /// Winding of the second-best distinct path minus m_min; +inf when only one path exists.
  double runner_up_gap = std::numeric_limits<double>::infinity();
};

/// Global minimizer of the winding over all lattice paths from i_a to i_b,
/// by forward dynamic programming on the cost-to-come. Among equal costs the
/// smaller predecessor site wins, so the returned path is unique. The
/// accumulation order matches path_winding, so m_min equals the exhaustive
/// minimum bit for bit.
StationaryPathResult least_winding_path(const LagrangianModel& lagrangian, PhaseQuantum quantum,
                                        const TimeGrid& tgrid, const SpaceGrid& sgrid,
                                        std::size_t i_a, std::size_t i_b);

struct ConcentrationPoint {
  double h = 0.0;
  double rho = 0.0;
  double m_min = 0.0;
  std::uint64_t paths_in_window = 0;
  std::uint64_t total_paths = 0;
};

/// rho(h) = |sum of e^{2 pi i m} over paths with m <= m_min + delta| /
///          |sum over all paths|, for each h (strictly descending).
/// Throws CapacityError when the instance cannot be enumerated.
std::vector<ConcentrationPoint> phase_concentration(const LagrangianModel& lagrangian,
                                                    const TimeGrid& tgrid,
                                                    const SpaceGrid& sgrid, std::size_t i_a,
                                                    std::size_t i_b,
                                                    std::span<const double> h_values,
                                                    double delta = 0.5,
                                                    std::uint64_t max_paths = 1u << 22);

void write_concentration_csv(std::ostream& out, std::span<const ConcentrationPoint> curve);

/// Constant rate of change of the countable coordinate.
struct RateModel {
  double nu = 1.0;
};

/// Sum of nu * epsilon over the slices: nu * (t_b - t_a).
double constant_rate_winding(RateModel rate, const TimeGrid& tgrid);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point2 a, Point2 b);

/// Piecewise-constant speed on contiguous intervals of the line.
class SpeedProfile1D {
 public:
  /// `breakpoints` has speeds.size() + 1 increasing entries.
  SpeedProfile1D(std::vector<double> breakpoints, std::vector<double> speeds);

  double speed_at(double r) const;
  /// Integral of dr / v between a and b (either order); throws if outside the profile.
  double travel_time(double a, double b) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> speeds_;
};

/// Two half-planes separated by the line y = interface_y: `upper` speed for
/// y >= interface_y, `lower` speed below.
struct MediumProfile {
  double upper = 1.0;
  double lower = 1.0;
  double interface_y = 0.0;

  double speed_at(Point2 p) const { return p.y >= interface_y ? upper : lower; }
};

/// Throws InvalidInput unless both speeds are positive and finite.
void validate(const MediumProfile& profile);

/// |a - c| / v(a side) + |c - b| / v(b side), with c = (crossing, interface_y).
double fermat_travel_time(const MediumProfile& profile, Point2 a, Point2 b, double crossing);

/// Golden-section search on [lo, hi] driven by a comparison: less(x, y) is
/// true when x is the better point. Stops when the bracket is narrower than abs_tol.
double golden_section_search(const std::function<bool(double, double)>& less, double lo,
                             double hi, double abs_tol = 1e-9);

/// Golden-section search for a minimum of a unimodal f on [lo, hi].
/// Stops when the bracket is narrower than abs_tol.
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double abs_tol = 1e-9);

struct FermatSolution {
  double crossing = 0.0;
  double time = 0.0;
};

/// Least-time crossing on the interface between the feet of a and b. Candidate
/// crossings are compared through the exact difference of their leg lengths,
/// so the search is not limited by the flatness of the travel time.
/// a and b must lie on opposite sides (a on the upper side); a point on the
/// interface counts as either side.
FermatSolution fermat_minimize(const MediumProfile& profile, Point2 a, Point2 b,
                               double abs_tol = 1e-9);

struct SnellReport {
  double sin_ratio = 0.0;    // sin(theta_upper) / sin(theta_lower), angles from the normal
  double speed_ratio = 0.0;  // upper / lower
  double residual = 0.0;     // |sin_ratio - speed_ratio|
};

SnellReport snell_check(const MediumProfile& profile, Point2 a, Point2 b, double crossing);

void write_fermat_header(std::ostream& out);
void write_fermat_row(std::ostream& out, const MediumProfile& profile,
                      const FermatSolution& solution, const SnellReport& snell);

/// A piecewise-linear trajectory travelled at the local speed.
struct Polyline {
  std::vector<Point2> vertices;
};

/// Sum of segment length / local speed. A segment that leaves its half-plane
/// is inadmissible (InvalidInput); segments lying on the interface use the
/// faster speed.
double polyline_travel_time(const MediumProfile& profile, const Polyline& path);

/// Random admissible paths from a to b: an upper polyline to a random
/// interface point, then a lower polyline to b, with up to `max_bends`
/// bends in each half.
std::vector<Polyline> sample_admissible_paths(const MediumProfile& profile, Point2 a, Point2 b,
                                              std::size_t count, Rng& rng,
                                              std::size_t max_bends = 2);

struct SpeedBoundReport {
  double time_star = 0.0;
  double bound_speed = 0.0;  // |b - a| / time_star
  double min_path_time = std::numeric_limits<double>::infinity();
  double max_path_speed = 0.0;
  std::size_t violations = 0;             // paths with time < time_star - tolerance
  std::vector<double> path_times;         // per sampled path
};

SpeedBoundReport speed_bound_check(const MediumProfile& profile, Point2 a, Point2 b,
                                   std::span<const Polyline> paths, double tolerance = 1e-12);

}  // namespace pathlab
