#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>

#include "pathlab/intermediate_set.hpp"

namespace pathlab {

using Amplitude = std::complex<double>;

/// Nonnegative real envelope A(r) on a declared support.
struct Envelope {
  std::function<double(double)> fn;
  Interval support;

  /// A(r). Throws InvalidInput if r is outside the support or A(r) is
  /// negative or non-finite.
  double operator()(double r) const;

  static Envelope constant(double value, Interval support);
  /// Unit-normalized Gaussian envelope: A(r)^2 is the normal density N(mu, sigma^2).
  static Envelope gaussian(double mu, double sigma, Interval support);
};

/// e^{2 pi i turns}. The argument is reduced to a quarter-turn before the
/// trigonometric call, so integer turns give exactly 1 and quarter turns give
/// exactly +-1 or +-i.
Amplitude unit_phase(double turns);

/// A(r) e^{2 pi i n}.
Amplitude eval_psi(const Envelope& envelope, double n, double r);

/// |psi|^2.
inline double born(Amplitude psi) { return psi.real() * psi.real() + psi.imag() * psi.imag(); }

/// Componentwise sum, left to right. Throws InvalidInput on an empty sequence.
Amplitude superpose(std::span<const Amplitude> terms);

/// psi e^{2 pi i c}: shifting the countable coordinate by c.
Amplitude phase_shift(Amplitude psi, double c);

/// CSV `r,re,im,prob` of A(r) e^{2 pi i n(r)} sampled at the given points.
void write_amplitude_table(std::ostream& out, const Envelope& envelope,
                           const std::function<double(double)>& countable_coordinate,
                           std::span<const double> points);

}  // namespace pathlab
