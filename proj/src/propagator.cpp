#include "pathlab/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "pathlab/csv.hpp"
#include "pathlab/errors.hpp"

namespace pathlab {

Amplitude step_normalization(const LagrangianModel& lagrangian, PhaseQuantum quantum,
                             double epsilon, Normalization normalization) {
  if (normalization == Normalization::raw) return 1.0;
  if (!(lagrangian.mass > 0.0)) throw InvalidInput("feynman normalization needs mass > 0");
  const double c = lagrangian.mass / (2.0 * std::numbers::pi * quantum.hbar() * epsilon);
  return std::sqrt(Amplitude(0.0, -c));  // c / i
}

double absorber_damping(const std::optional<AbsorbingLayer>& absorber, const SpaceGrid& sgrid,
                        std::size_t site, double epsilon) {
  if (!absorber || absorber->strength == 0.0) return 1.0;
  const double r = sgrid.position(site);
  const double depth =
      std::max({0.0, sgrid.r_min + absorber->width - r, r - (sgrid.r_max - absorber->width)});
  const double s = depth / absorber->width;
  return std::exp(-absorber->strength * s * s * epsilon);
}

namespace {

void check_absorber(const PropagatorOptions& options, const SpaceGrid& sgrid) {
  if (!options.absorber) return;
  const auto& layer = *options.absorber;
  if (!(layer.width > 0.0) || !(layer.strength >= 0.0) ||
      2.0 * layer.width >= sgrid.r_max - sgrid.r_min) {
    throw InvalidInput("absorbing layer needs width > 0, strength >= 0 and room for an interior");
  }
}

void check_endpoints(std::size_t i_a, std::size_t i_b, const SpaceGrid& sgrid) {
  if (i_a >= sgrid.sites || i_b >= sgrid.sites) {
    throw InvalidInput("propagator endpoint beyond the space grid");
  }
}

}  // namespace

std::uint64_t path_count(std::size_t sites, std::size_t steps) {
  std::uint64_t count = 1;
  for (std::size_t i = 1; i < steps; ++i) {
    if (count > std::numeric_limits<std::uint64_t>::max() / sites) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= sites;
  }
  return count;
}

void for_each_path(const SpaceGrid& sgrid, std::size_t steps, std::size_t i_a, std::size_t i_b,
                   std::uint64_t max_paths,
                   const std::function<void(const LatticePath&)>& visit) {
  if (steps == 0) throw InvalidInput("path enumeration needs at least one step");
  check_endpoints(i_a, i_b, sgrid);
  const std::uint64_t count = path_count(sgrid.sites, steps);
  if (count > max_paths) {
    throw CapacityError(std::to_string(sgrid.sites) + "^" + std::to_string(steps - 1) +
                        " paths exceed the enumeration budget of " + std::to_string(max_paths) +
                        "; use the transfer method");
  }
  LatticePath path;
  path.sites.assign(steps + 1, 0);
  path.sites.front() = i_a;
  path.sites.back() = i_b;
  while (true) {
    visit(path);
    // Odometer over interior sites, last slice fastest.
    std::size_t i = steps - 1;
    while (i >= 1 && path.sites[i] + 1 == sgrid.sites) {
      path.sites[i] = 0;
      --i;
    }
    if (i == 0) return;
    ++path.sites[i];
  }
}

std::vector<LatticePath> enumerate_paths(const SpaceGrid& sgrid, std::size_t steps,
                                         std::size_t i_a, std::size_t i_b,
                                         std::uint64_t max_paths) {
  std::vector<LatticePath> paths;
  for_each_path(sgrid, steps, i_a, i_b, max_paths,
                [&](const LatticePath& p) { paths.push_back(p); });
  return paths;
}

PropagatorResult propagator_bruteforce(std::size_t i_a, std::size_t i_b, const TimeGrid& tgrid,
                                       const SpaceGrid& sgrid, const LagrangianModel& lagrangian,
                                       PhaseQuantum quantum, const PropagatorOptions& options) {
  check_absorber(options, sgrid);
  std::vector<double> damping(sgrid.sites);
  for (std::size_t j = 0; j < sgrid.sites; ++j) {
    damping[j] = absorber_damping(options.absorber, sgrid, j, tgrid.epsilon);
  }

  Amplitude sum = 0.0;
  std::uint64_t paths = 0;
  for_each_path(sgrid, tgrid.steps, i_a, i_b, options.max_paths, [&](const LatticePath& path) {
    double weight = 1.0;
    for (std::size_t i = 1; i < path.sites.size(); ++i) weight *= damping[path.sites[i]];
    sum += weight * unit_phase(path_winding(path, lagrangian, quantum, tgrid, sgrid));
    ++paths;
  });

  const Amplitude n = step_normalization(lagrangian, quantum, tgrid.epsilon, options.normalization);
  const auto k = static_cast<int>(tgrid.steps);
  const Amplitude prefactor = std::pow(n, k) * std::pow(sgrid.delta_r, k - 1);
  return {prefactor * sum, PropagatorMethod::bruteforce, paths, n, tgrid, sgrid};
}

TransferKernel::TransferKernel(const LagrangianModel& lagrangian, PhaseQuantum quantum,
                               const TimeGrid& tgrid, std::size_t slice, const SpaceGrid& sgrid,
                               const PropagatorOptions& options)
    : sites_(sgrid.sites), toeplitz_(lagrangian.translation_invariant) {
  if (slice < 1 || slice > tgrid.steps) throw InvalidInput("transfer slice out of range");
  check_absorber(options, sgrid);
  const double t_mid = tgrid.midpoint(slice);
  const Amplitude weight =
      step_normalization(lagrangian, quantum, tgrid.epsilon, options.normalization) *
      sgrid.delta_r;
  auto element = [&](double r_from, double r_to) {
    return weight *
           unit_phase(step_increment(lagrangian, quantum, r_from, r_to, t_mid, tgrid.epsilon));
  };

  damping_.resize(sites_);
  for (std::size_t j = 0; j < sites_; ++j) {
    damping_[j] = absorber_damping(options.absorber, sgrid, j, tgrid.epsilon);
  }

  const auto m = static_cast<std::ptrdiff_t>(sites_);
  if (toeplitz_) {
    // re_[q] holds displacement d = (m - 1) - q, so a row reads it contiguously.
    re_.resize(2 * sites_ - 1);
    im_.resize(2 * sites_ - 1);
    for (std::ptrdiff_t q = 0; q < 2 * m - 1; ++q) {
      const auto d = static_cast<double>(m - 1 - q);
      const Amplitude e = element(0.0, d * sgrid.delta_r);
      re_[static_cast<std::size_t>(q)] = e.real();
      im_[static_cast<std::size_t>(q)] = e.imag();
    }
  } else {
    re_.resize(sites_ * sites_);
    im_.resize(sites_ * sites_);
    for (std::size_t to = 0; to < sites_; ++to) {
      const double r_to = sgrid.position(to);
      for (std::size_t from = 0; from < sites_; ++from) {
        const Amplitude e = element(sgrid.position(from), r_to);
        re_[to * sites_ + from] = e.real();
        im_[to * sites_ + from] = e.imag();
      }
    }
  }
}

Amplitude TransferKernel::entry(std::size_t to, std::size_t from) const {
  const std::size_t index = toeplitz_ ? sites_ - 1 - to + from : to * sites_ + from;
  return damping_[to] * Amplitude(re_[index], im_[index]);
}

void TransferKernel::apply(std::span<const double> in_re, std::span<const double> in_im,
                           std::span<double> out_re, std::span<double> out_im,
                           unsigned threads) const {
  const std::size_t n = sites_;
  auto rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t to = begin; to < end; ++to) {
      const double* kr = toeplitz_ ? re_.data() + (n - 1 - to) : re_.data() + to * n;
      const double* ki = toeplitz_ ? im_.data() + (n - 1 - to) : im_.data() + to * n;
      double acc_re = 0.0;
      double acc_im = 0.0;
      for (std::size_t from = 0; from < n; ++from) {
        acc_re += kr[from] * in_re[from] - ki[from] * in_im[from];
        acc_im += kr[from] * in_im[from] + ki[from] * in_re[from];
      }
      out_re[to] = damping_[to] * acc_re;
      out_im[to] = damping_[to] * acc_im;
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    rows(0, n);
    return;
  }
  std::vector<std::jthread> workers;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    workers.emplace_back(rows, begin, std::min(n, begin + chunk));
  }
}

std::vector<Amplitude> transfer_evolve(std::vector<Amplitude> state,
                                       const LagrangianModel& lagrangian, PhaseQuantum quantum,
                                       const TimeGrid& tgrid, const SpaceGrid& sgrid,
                                       std::size_t first_slice, std::size_t last_slice,
                                       const PropagatorOptions& options) {
  if (state.size() != sgrid.sites) throw InvalidInput("state length does not match the grid");
  if (first_slice < 1 || last_slice > tgrid.steps || first_slice > last_slice) {
    throw InvalidInput("slice range outside the time grid");
  }
  const std::size_t n = sgrid.sites;
  std::vector<double> re(n), im(n), next_re(n), next_im(n);
  for (std::size_t j = 0; j < n; ++j) {
    re[j] = state[j].real();
    im[j] = state[j].imag();
  }
  std::optional<TransferKernel> kernel;
  for (std::size_t slice = first_slice; slice <= last_slice; ++slice) {
    if (!kernel || !lagrangian.time_independent) {
      kernel.emplace(lagrangian, quantum, tgrid, slice, sgrid, options);
    }
    kernel->apply(re, im, next_re, next_im, options.threads);
    std::swap(re, next_re);
    std::swap(im, next_im);
  }
  for (std::size_t j = 0; j < n; ++j) state[j] = {re[j], im[j]};
  return state;
}

std::vector<Amplitude> transfer_row(std::size_t i_a, const TimeGrid& tgrid,
                                    const SpaceGrid& sgrid, const LagrangianModel& lagrangian,
                                    PhaseQuantum quantum, const PropagatorOptions& options) {
  check_endpoints(i_a, i_a, sgrid);
  std::vector<Amplitude> state(sgrid.sites, 0.0);
  state[i_a] = 1.0;
  state = transfer_evolve(std::move(state), lagrangian, quantum, tgrid, sgrid, 1, tgrid.steps,
                          options);
  for (auto& z : state) z /= sgrid.delta_r;
  return state;
}

PropagatorResult propagator_transfer(std::size_t i_a, std::size_t i_b, const TimeGrid& tgrid,
                                     const SpaceGrid& sgrid, const LagrangianModel& lagrangian,
                                     PhaseQuantum quantum, const PropagatorOptions& options) {
  check_endpoints(i_a, i_b, sgrid);
  const auto row = transfer_row(i_a, tgrid, sgrid, lagrangian, quantum, options);
  return {row[i_b], PropagatorMethod::transfer, 0,
          step_normalization(lagrangian, quantum, tgrid.epsilon, options.normalization), tgrid,
          sgrid};
}

Amplitude analytic_free_particle(double a, double b, double duration, double mass, double hbar) {
  if (!(duration > 0.0) || !(mass > 0.0) || !(hbar > 0.0)) {
    throw InvalidInput("free-particle kernel needs positive T, mass and hbar");
  }
  const double c = mass / (2.0 * std::numbers::pi * hbar * duration);
  const Amplitude prefactor = std::sqrt(Amplitude(0.0, -c));
  const double phase = mass * (b - a) * (b - a) / (2.0 * hbar * duration);
  return prefactor * std::polar(1.0, phase);
}

double phase_difference(Amplitude z, Amplitude reference) {
  return std::arg(z * std::conj(reference));
}

PropagatorReportRow make_report_row(const PropagatorResult& result,
                                    std::optional<Amplitude> oracle) {
  PropagatorReportRow row;
  row.k = result.tgrid.steps;
  row.m_sites = result.sgrid.sites;
  row.epsilon = result.tgrid.epsilon;
  row.kernel = result.kernel;
  if (oracle) {
    row.abs_err_vs_oracle = std::abs(std::abs(result.kernel) - std::abs(*oracle)) / std::abs(*oracle);
    row.phase_err_vs_oracle = std::abs(phase_difference(result.kernel, *oracle));
  } else {
    row.abs_err_vs_oracle = std::numeric_limits<double>::quiet_NaN();
    row.phase_err_vs_oracle = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

void write_propagator_csv(std::ostream& out, std::span<const PropagatorReportRow> rows) {
  out << "k,m_sites,epsilon,re_K,im_K,abs_K,phase_K,abs_err_vs_oracle,phase_err_vs_oracle\n";
  for (const auto& r : rows) {
    csv::row(out, r.k, r.m_sites, r.epsilon, r.kernel.real(), r.kernel.imag(), std::abs(r.kernel),
             std::arg(r.kernel), r.abs_err_vs_oracle, r.phase_err_vs_oracle);
  }
}

}  // namespace pathlab
