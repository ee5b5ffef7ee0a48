#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "pathlab/rng.hpp"

namespace pathlab {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  bool contains(double r) const { return r >= lo && r <= hi; }
};

/// A point of the intermediate set: a definite countable coordinate plus a
/// bookkeeping tag among the members of its unit set. Nothing branches on
/// the tag; two points with the same unit_index behave identically.
struct IntermediatePoint {
  std::uint64_t unit_index = 0;
  std::uint64_t tag = 0;
};

/// Law of the random real image of a point, on a bounded support.
///
/// Internally the density is tabulated on `cells` equal cells and sampled
/// from its piecewise-linear interpolant by exact inverse-CDF, so the draw
/// always lies in the support and consumes exactly one uniform variate.
class MappingDistribution {
 public:
  using Density = std::function<double(double)>;

  /// Tabulates `density` on the support. Throws InvalidInput if the support
  /// is empty, any tabulated value is negative or non-finite, or the
  /// integral is not positive.
  static MappingDistribution from_density(Interval support, const Density& density,
                                          std::size_t cells = 4096);
  /// The default equiprobable law on a window.
  static MappingDistribution uniform(Interval support);
  /// Piecewise-constant law: `masses[i]` spread evenly on [edges[i], edges[i+1]].
  static MappingDistribution from_bins(std::span<const double> edges,
                                       std::span<const double> masses);

  const Interval& support() const { return support_; }
  /// Integral of the supplied density over the support (before normalizing).
  double normalization() const { return normalization_; }
  /// Normalized density of the tabulated law at r (zero outside the support).
  double density(double r) const;

  /// Maps a uniform variate u in [0,1) to a draw.
  double quantile(double u) const;

 private:
  MappingDistribution() = default;
  void finalize();

  Interval support_;
  // Per cell: [x0, x1] with density values f0, f1 at the ends (unnormalized).
  std::vector<double> nodes_lo_, nodes_hi_, f_lo_, f_hi_;
  std::vector<double> cdf_;  // cumulative mass at each cell's upper end
  double normalization_ = 0.0;
};

/// Draws the random real image of `point`. The image law is supplied by the
/// caller, so neither the unit index nor the tag enters the draw.
double sample_image(const IntermediatePoint& point, const MappingDistribution& dist, Rng& rng);

/// `count` draws from a fresh generator seeded with `seed`.
std::vector<double> sample_images(const IntermediatePoint& point, const MappingDistribution& dist,
                                  std::size_t count, std::uint64_t seed);

struct Histogram {
  std::vector<double> edges;        // bins + 1 equally spaced edges
  std::vector<double> frequencies;  // sums to 1
};

/// Normalized histogram of samples on equal bins. Samples equal to the upper
/// edge fall in the last bin. Throws InvalidInput on empty input, zero bins,
/// or a sample outside the support.
Histogram empirical_density(std::span<const double> samples, std::size_t bins, Interval support);

/// Half the L1 distance between two probability vectors of equal length.
double total_variation(std::span<const double> p, std::span<const double> q);

void write_samples_csv(std::ostream& out, std::span<const double> samples);
void write_histogram_csv(std::ostream& out, const Histogram& hist);

struct StoppingRuleRecord {
  std::uint64_t n_target = 1;
  std::uint64_t n_checked = 1;
};

/// n_target / n_checked. Throws InvalidInput unless n_checked >= n_target >= 1.
double stopping_rule_probability(const StoppingRuleRecord& record);

/// Examines a stream of items, each marked with probability `marked_rate`,
/// until `n_target` marked items have been found.
StoppingRuleRecord simulate_stopping_run(std::uint64_t n_target, double marked_rate, Rng& rng);

/// Mean of stopping_rule_probability over `runs` independent runs on one stream.
double mean_stopping_probability(std::uint64_t n_target, double marked_rate, std::size_t runs,
                                 std::uint64_t seed);

}  // namespace pathlab
