#include <doctest.h>

#include "front_blocker/error.hpp"
#include "front_blocker/traveling_wave.hpp"

#include <cmath>
#include <random>

using namespace front_blocker;

namespace {

ExtendedNonlinearity cubic(double th,
                           BistableNonlinearity::Checks checks = BistableNonlinearity::Checks::All) {
  return ExtendedNonlinearity(BistableNonlinearity::cubic(th, checks));
}

// Closed-form wave of the cubic, shifted so that phi(0) = theta.
double exact_wave(double th, double z) {
  const double z0 = std::sqrt(2.0) * std::log((1.0 - th) / th);
  return 1.0 / (1.0 + std::exp(-(z - z0) / std::sqrt(2.0)));
}

}  // namespace

TEST_CASE("speed matches the closed form") {
  for (double th : {0.1, 0.25, 0.4}) {
    const auto w = solve_wave(cubic(th));
    CHECK(w.speed() == doctest::Approx(std::sqrt(2.0) * (0.5 - th)).epsilon(1e-4));
    CHECK(w.ode_residual(cubic(th)) < 1e-6);
  }
}

TEST_CASE("profile invariants and normalization") {
  const double th = 0.25;
  const auto w = solve_wave(cubic(th));
  CHECK(wave_at(w, 0.0) == doctest::Approx(th).epsilon(1e-8));
  CHECK(w.phi().front() < 1e-4);
  CHECK(w.phi().back() > 1.0 - 1e-4);
  for (std::size_t i = 1; i < w.phi().size(); ++i) {
    CHECK(w.phi()[i] > w.phi()[i - 1]);
    CHECK(w.phi()[i] > 0.0);
    CHECK(w.phi()[i] < 1.0);
  }
  CHECK(std::abs(wave_at(w, -1e6)) < 1e-12);
  CHECK(std::abs(wave_at(w, 1e6) - 1.0) < 1e-12);
  for (double z = -20.0; z <= 20.0; z += 0.37) CHECK(wave_at(w, z) == doctest::Approx(exact_wave(th, z)).epsilon(1e-5));
}

TEST_CASE("wave_at is nondecreasing on random pairs") {
  const auto w = solve_wave(cubic(0.3));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> z(-60.0, 60.0);
  for (int i = 0; i < 2000; ++i) {
    double a = z(rng), b = z(rng);
    if (a > b) std::swap(a, b);
    CHECK(wave_at(w, a) <= wave_at(w, b));
  }
}

TEST_CASE("shifting the grid leaves the speed and shape unchanged") {
  const auto w = solve_wave(cubic(0.25));
  const auto s = w.shifted(3.5);
  CHECK(s.speed() == w.speed());
  for (double z = -10.0; z <= 10.0; z += 0.5) CHECK(s.at(z + 3.5) == doctest::Approx(w.at(z)).epsilon(1e-12));
}

TEST_CASE("speed sign follows the sign of the mass") {
  const auto skip = BistableNonlinearity::Checks::SkipPositiveMass;
  CHECK(solve_wave(cubic(0.45)).speed() > 0.0);
  CHECK(solve_wave(cubic(0.55, skip)).speed() < 0.0);
  CHECK(solve_wave(cubic(0.55, skip)).speed() == doctest::Approx(std::sqrt(2.0) * -0.05).epsilon(1e-4));
}

TEST_CASE("width is the reciprocal peak slope") {
  // peak slope of the logistic profile with scale sqrt 2 is 1 / (4 sqrt 2)
  const auto w = solve_wave(cubic(0.25));
  CHECK(w.width() == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-4));
}
