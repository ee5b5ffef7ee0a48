#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pathlab/amplitude.hpp"
#include "pathlab/errors.hpp"
#include "pathlab/rng.hpp"

using namespace pathlab;

namespace {

const Interval kLine{-10.0, 10.0};

bool close(Amplitude x, Amplitude y, double tol) {
  return std::abs(x.real() - y.real()) <= tol && std::abs(x.imag() - y.imag()) <= tol;
}

}  // namespace

TEST_CASE("eval_psi on a constant envelope") {
  const auto one = Envelope::constant(1.0, kLine);
  CHECK(eval_psi(one, 0.0, 0.0) == Amplitude(1.0, 0.0));
  CHECK(eval_psi(one, 0.5, 0.0) == Amplitude(-1.0, 0.0));
  CHECK(eval_psi(one, 7.0, 0.0) == Amplitude(1.0, 0.0));
  CHECK(eval_psi(one, 0.25, 0.0) == Amplitude(0.0, 1.0));
  CHECK(eval_psi(one, -0.25, 0.0) == Amplitude(0.0, -1.0));
  CHECK_THROWS_AS(eval_psi(one, 0.0, 11.0), InvalidInput);
}

TEST_CASE("envelope validation") {
  const Envelope negative{[](double) { return -1.0; }, kLine};
  CHECK_THROWS_AS(negative(0.0), InvalidInput);
  const Envelope nan{[](double) { return NAN; }, kLine};
  CHECK_THROWS_AS(nan(0.0), InvalidInput);
  CHECK_THROWS_AS(Envelope::gaussian(0.0, 0.0, kLine), InvalidInput);

  const auto g = Envelope::gaussian(1.0, 2.0, kLine);
  const double expected = std::exp(-0.5 * 0.5 / 16.0) / std::sqrt(2.0 * std::sqrt(2.0 * std::numbers::pi));
  CHECK(g(1.5) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("born rule") {
  CHECK(born({1.0, 0.0}) == 1.0);
  CHECK(born({0.6, 0.8}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(born({0.0, 0.0}) == 0.0);
}

TEST_CASE("superpose") {
  const Amplitude psi{0.3, -0.7};
  const std::vector<Amplitude> cancel{psi, -psi};
  CHECK(superpose(cancel) == Amplitude(0.0, 0.0));
  CHECK(born(superpose(cancel)) == 0.0);

  const std::vector<Amplitude> twice{psi, psi};
  CHECK(born(superpose(twice)) == doctest::Approx(4.0 * born(psi)).epsilon(1e-15));
  CHECK(born(superpose(twice)) != doctest::Approx(2.0 * born(psi)));

  const std::vector<Amplitude> single{{1.0, 0.0}};
  CHECK(superpose(single) == Amplitude(1.0, 0.0));
  CHECK_THROWS_AS(superpose(std::span<const Amplitude>{}), InvalidInput);
}

TEST_CASE("phase shift") {
  CHECK(phase_shift({1.0, 0.0}, 0.25) == Amplitude(0.0, 1.0));
  const Amplitude psi{0.123, -4.5};
  CHECK(phase_shift(psi, 0.0) == psi);
  CHECK(phase_shift(psi, 3.0) == psi);
  CHECK(phase_shift(psi, -2.0) == psi);

  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const Amplitude z{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    const double c = rng.uniform(-100.0, 100.0);
    CHECK(std::abs(born(phase_shift(z, c)) - born(z)) <= 1e-12 * std::max(1.0, born(z)));
  }
}

TEST_CASE("covariance of the countable coordinate") {
  Rng rng(31);
  const auto g = Envelope::gaussian(0.5, 1.5, kLine);
  for (int i = 0; i < 1000; ++i) {
    const double n = rng.uniform(-50.0, 50.0);
    const double c = rng.uniform(-5.0, 5.0);
    const double r = rng.uniform(-9.0, 9.0);
    CHECK(close(eval_psi(g, n + c, r), phase_shift(eval_psi(g, n, r), c), 1e-12));
    const double integer_shift = std::round(c);
    CHECK(eval_psi(g, n, r) == phase_shift(eval_psi(g, n, r), integer_shift));
  }
}

TEST_CASE("modulus factorization and linearity") {
  Rng rng(5);
  const Envelope bump{[](double r) { return 1.0 / (1.0 + r * r); }, kLine};
  for (int i = 0; i < 200; ++i) {
    const double r = rng.uniform(-10.0, 10.0);
    const double n = rng.uniform(-1e3, 1e3);
    const double a = bump(r);
    CHECK(born(eval_psi(bump, n, r)) == doctest::Approx(a * a).epsilon(1e-12));
  }
  for (int i = 0; i < 100; ++i) {
    std::vector<Amplitude> terms(1 + rng.below(6));
    for (auto& t : terms) t = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const double s = rng.uniform(-3.0, 3.0);
    std::vector<Amplitude> scaled;
    for (auto t : terms) scaled.push_back(s * t);
    CHECK(close(superpose(scaled), s * superpose(terms), 1e-12));
  }
}

TEST_CASE("interference term decides additivity") {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const Amplitude x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const Amplitude y{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const std::vector<Amplitude> pair{x, y};
    const double cross = 2.0 * (x * std::conj(y)).real();
    CHECK(born(superpose(pair)) == doctest::Approx(born(x) + born(y) + cross).epsilon(1e-12));
    if (std::abs(cross) > 1e-6) CHECK(born(superpose(pair)) != doctest::Approx(born(x) + born(y)));
  }
  // Orthogonal phases: a quarter turn apart.
  const Amplitude x{0.8, 0.0};
  const Amplitude y = phase_shift({0.6, 0.0}, 0.25);
  const std::vector<Amplitude> pair{x, y};
  CHECK(born(superpose(pair)) == born(x) + born(y));
}

TEST_CASE("amplitude table csv") {
  const auto one = Envelope::constant(1.0, kLine);
  const std::vector<double> points{0.0, 1.0};
  std::ostringstream out;
  write_amplitude_table(out, one, [](double r) { return 0.5 * r; }, points);
  CHECK(out.str() == "r,re,im,prob\n0,1,0,1\n1,-1,0,1\n");
}

TEST_CASE("unit phase near whole turns") {
  CHECK(unit_phase(-1e-17).real() == 1.0);
  CHECK(std::abs(unit_phase(-1e-17).imag()) < 1e-16);
  CHECK(std::abs(unit_phase(-3.0 - 1e-15) - std::polar(1.0, -2e-15 * std::numbers::pi)) < 1e-15);
  CHECK(unit_phase(0.5) == Amplitude(-1.0, 0.0));
  CHECK(unit_phase(-0.75) == Amplitude(0.0, 1.0));
}
