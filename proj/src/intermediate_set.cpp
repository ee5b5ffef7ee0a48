#include "pathlab/intermediate_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "pathlab/csv.hpp"
#include "pathlab/errors.hpp"

namespace pathlab {

namespace {

void check_support(const Interval& support) {
  if (!(support.lo < support.hi) || !std::isfinite(support.lo) || !std::isfinite(support.hi)) {
    throw InvalidInput("mapping support must be a finite interval with lo < hi");
  }
}

double checked_density(const MappingDistribution::Density& density, double r) {
  const double value = density(r);
  if (!std::isfinite(value) || value < 0.0) {
    throw InvalidInput("density must be finite and nonnegative; got " + std::to_string(value) +
                       " at r=" + std::to_string(r));
  }
  return value;
}

}  // namespace

MappingDistribution MappingDistribution::from_density(Interval support, const Density& density,
                                                      std::size_t cells) {
  check_support(support);
  if (cells < 2) throw InvalidInput("density tabulation needs at least 2 cells");
  if (cells % 2 != 0) ++cells;  // Simpson pairs

  MappingDistribution dist;
  dist.support_ = support;
  const double width = support.width() / static_cast<double>(cells);
  std::vector<double> x(cells + 1), f(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) {
    x[i] = i == cells ? support.hi : support.lo + static_cast<double>(i) * width;
    f[i] = checked_density(density, x[i]);
  }

  double simpson = f.front() + f.back();
  for (std::size_t i = 1; i < cells; ++i) simpson += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
  dist.normalization_ = simpson * width / 3.0;
  if (!(dist.normalization_ > 0.0) || !std::isfinite(dist.normalization_)) {
    throw InvalidInput("density must have positive finite integral over the support");
  }

  dist.nodes_lo_.assign(x.begin(), x.end() - 1);
  dist.nodes_hi_.assign(x.begin() + 1, x.end());
  dist.f_lo_.assign(f.begin(), f.end() - 1);
  dist.f_hi_.assign(f.begin() + 1, f.end());
  dist.finalize();
  return dist;
}

MappingDistribution MappingDistribution::uniform(Interval support) {
  const double edges[] = {support.lo, support.hi};
  const double masses[] = {1.0};
  return from_bins(edges, masses);
}

MappingDistribution MappingDistribution::from_bins(std::span<const double> edges,
                                                   std::span<const double> masses) {
  if (edges.size() < 2 || masses.size() + 1 != edges.size()) {
    throw InvalidInput("bins need edges.size() == masses.size() + 1 >= 2");
  }
  MappingDistribution dist;
  dist.support_ = {edges.front(), edges.back()};
  check_support(dist.support_);
  double total = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    const double w = edges[i + 1] - edges[i];
    if (!(w > 0.0)) throw InvalidInput("bin edges must be strictly increasing");
    if (!std::isfinite(masses[i]) || masses[i] < 0.0) {
      throw InvalidInput("bin masses must be finite and nonnegative");
    }
    dist.nodes_lo_.push_back(edges[i]);
    dist.nodes_hi_.push_back(edges[i + 1]);
    dist.f_lo_.push_back(masses[i] / w);
    dist.f_hi_.push_back(masses[i] / w);
    total += masses[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw InvalidInput("bin masses must have positive finite total");
  }
  dist.normalization_ = total;
  dist.finalize();
  return dist;
}

void MappingDistribution::finalize() {
  cdf_.resize(f_lo_.size());
  double running = 0.0;
  for (std::size_t i = 0; i < f_lo_.size(); ++i) {
    running += 0.5 * (f_lo_[i] + f_hi_[i]) * (nodes_hi_[i] - nodes_lo_[i]);
    cdf_[i] = running;
  }
}

double MappingDistribution::density(double r) const {
  if (!support_.contains(r)) return 0.0;
  auto it = std::upper_bound(nodes_hi_.begin(), nodes_hi_.end(), r);
  std::size_t i = it == nodes_hi_.end() ? nodes_hi_.size() - 1
                                        : static_cast<std::size_t>(it - nodes_hi_.begin());
  const double w = nodes_hi_[i] - nodes_lo_[i];
  const double s = (r - nodes_lo_[i]) / w;
  return (f_lo_[i] + (f_hi_[i] - f_lo_[i]) * s) / cdf_.back();
}

double MappingDistribution::quantile(double u) const {
  const double total = cdf_.back();
  const double target = std::clamp(u, 0.0, 1.0) * total;
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  if (it == cdf_.end()) return support_.hi;
  const auto i = static_cast<std::size_t>(it - cdf_.begin());
  const double before = i == 0 ? 0.0 : cdf_[i - 1];
  const double tau = target - before;
  const double w = nodes_hi_[i] - nodes_lo_[i];
  const double f0 = f_lo_[i];
  const double f1 = f_hi_[i];
  // Solve f0*s + (f1 - f0)*s^2/(2w) = tau for s in [0, w].
  const double disc = std::max(0.0, f0 * f0 + 2.0 * (f1 - f0) * tau / w);
  const double denom = f0 + std::sqrt(disc);
  double s = denom > 0.0 ? 2.0 * tau / denom : 0.0;
  s = std::clamp(s, 0.0, w);
  return std::min(nodes_lo_[i] + s, nodes_hi_[i]);
}

double sample_image(const IntermediatePoint& /*point*/, const MappingDistribution& dist,
                    Rng& rng) {
  return dist.quantile(rng.uniform());
}

std::vector<double> sample_images(const IntermediatePoint& point,
                                  const MappingDistribution& dist, std::size_t count,
                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& r : out) r = sample_image(point, dist, rng);
  return out;
}

Histogram empirical_density(std::span<const double> samples, std::size_t bins,
                            Interval support) {
  check_support(support);
  if (bins == 0) throw InvalidInput("histogram needs at least one bin");
  if (samples.empty()) throw InvalidInput("histogram of an empty sample list");

  Histogram hist;
  hist.edges.resize(bins + 1);
  const double width = support.width() / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) {
    hist.edges[i] = i == bins ? support.hi : support.lo + static_cast<double>(i) * width;
  }
  std::vector<std::size_t> counts(bins, 0);
  for (double r : samples) {
    if (!support.contains(r)) {
      throw InvalidInput("sample " + csv::num(r) + " outside histogram support");
    }
    auto bin = static_cast<std::size_t>((r - support.lo) / width);
    counts[std::min(bin, bins - 1)]++;
  }
  hist.frequencies.resize(bins);
  const auto n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < bins; ++i) hist.frequencies[i] = static_cast<double>(counts[i]) / n;
  return hist;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidInput("total variation of vectors of unequal length");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

void write_samples_csv(std::ostream& out, std::span<const double> samples) {
  out << "index,r\n";
  for (std::size_t i = 0; i < samples.size(); ++i) csv::row(out, i, samples[i]);
}

void write_histogram_csv(std::ostream& out, const Histogram& hist) {
  out << "bin_lo,bin_hi,frequency\n";
  for (std::size_t i = 0; i < hist.frequencies.size(); ++i) {
    csv::row(out, hist.edges[i], hist.edges[i + 1], hist.frequencies[i]);
  }
}

double stopping_rule_probability(const StoppingRuleRecord& record) {
  if (record.n_target < 1 || record.n_checked < record.n_target) {
    throw InvalidInput("stopping rule needs n_checked >= n_target >= 1");
  }
  return static_cast<double>(record.n_target) / static_cast<double>(record.n_checked);
}

StoppingRuleRecord simulate_stopping_run(std::uint64_t n_target, double marked_rate, Rng& rng) {
  if (n_target < 1) throw InvalidInput("stopping rule needs n_target >= 1");
  if (!(marked_rate > 0.0 && marked_rate <= 1.0)) {
    throw InvalidInput("marked-item rate must lie in (0, 1]");
  }
  StoppingRuleRecord record{n_target, 0};
  std::uint64_t found = 0;
  while (found < n_target) {
    ++record.n_checked;
    if (rng.bernoulli(marked_rate)) ++found;
  }
  return record;
}

double mean_stopping_probability(std::uint64_t n_target, double marked_rate, std::size_t runs,
                                 std::uint64_t seed) {
  if (runs == 0) throw InvalidInput("need at least one stopping-rule run");
  Rng rng(seed);
  double sum = 0.0;
  for (std::size_t i = 0; i < runs; ++i) {
    sum += stopping_rule_probability(simulate_stopping_run(n_target, marked_rate, rng));
  }
  return sum / static_cast<double>(runs);
}

}  // namespace pathlab
