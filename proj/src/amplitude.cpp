#include "pathlab/amplitude.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "pathlab/csv.hpp"
#include "pathlab/errors.hpp"

namespace pathlab {

double Envelope::operator()(double r) const {
  if (!support.contains(r)) {
    throw InvalidInput("r=" + csv::num(r) + " outside envelope support [" + csv::num(support.lo) +
                       ", " + csv::num(support.hi) + "]");
  }
  const double value = fn(r);
  if (!std::isfinite(value) || value < 0.0) {
    throw InvalidInput("envelope must be finite and nonnegative; got " + csv::num(value));
  }
  return value;
}

Envelope Envelope::constant(double value, Interval support) {
  return {[value](double) { return value; }, support};
}

Envelope Envelope::gaussian(double mu, double sigma, Interval support) {
  if (!(sigma > 0.0)) throw InvalidInput("gaussian envelope needs sigma > 0");
  const double scale = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  return {[=](double r) {
            const double z = (r - mu) / sigma;
            return scale * std::exp(-0.25 * z * z);
          },
          support};
}

Amplitude unit_phase(double turns) {
  if (!std::isfinite(turns)) throw InvalidInput("phase must be finite");
  double frac = turns - std::floor(turns);
  if (frac >= 1.0) frac = 0.0;  // tiny negative turns round up to 1
  const double quarters = 4.0 * frac;              // exact
  const double quadrant = std::floor(quarters);
  const double angle = (quarters - quadrant) * (0.5 * std::numbers::pi);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  switch (static_cast<int>(quadrant)) {
    case 0: return {c, s};
    case 1: return {0.0 - s, c};
    case 2: return {-c, 0.0 - s};
    default: return {s, -c};
  }
}

Amplitude eval_psi(const Envelope& envelope, double n, double r) {
  return envelope(r) * unit_phase(n);
}

Amplitude superpose(std::span<const Amplitude> terms) {
  if (terms.empty()) throw InvalidInput("superposition of an empty sequence");
  Amplitude sum = 0.0;
  for (const auto& t : terms) sum += t;
  return sum;
}

Amplitude phase_shift(Amplitude psi, double c) {
  const Amplitude u = unit_phase(c);
  // Spelled out so that u == 1 leaves psi bit-identical.
  return {psi.real() * u.real() - psi.imag() * u.imag(),
          psi.real() * u.imag() + psi.imag() * u.real()};
}

void write_amplitude_table(std::ostream& out, const Envelope& envelope,
                           const std::function<double(double)>& countable_coordinate,
                           std::span<const double> points) {
  out << "r,re,im,prob\n";
  for (double r : points) {
    const Amplitude psi = eval_psi(envelope, countable_coordinate(r), r);
    csv::row(out, r, psi.real(), psi.imag(), born(psi));
  }
}

}  // namespace pathlab
