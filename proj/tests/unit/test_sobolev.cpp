#include <doctest.h>

#include "front_blocker/error.hpp"
#include "front_blocker/sobolev.hpp"

#include <cmath>

using namespace front_blocker;

namespace {

const CrossSection kOmega({0.5, 0.5});

SobolevEstimateOptions coarse() {
  SobolevEstimateOptions o;
  o.resolution = {25, {6, 6}};
  return o;
}

// ||w||_{L^q} / ||w||_{H^1} of a Gaussian bump on the same grid the estimator uses
double gaussian_quotient(const SobolevEstimateOptions& o, double cx, double s2) {
  const TruncatedGrid g(DriftField::zero(1.0), kOmega, 0.0, o.length, o.resolution);
  std::vector<double> w(g.node_count());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const int ia = g.index(i, 0);
    if (ia == 0 || ia == g.size(0) - 1) continue;
    double r2 = std::pow(g.x1(i) - cx, 2);
    for (double y : g.y(i)) r2 += y * y;
    w[i] = std::exp(-r2 / s2);
  }
  double lq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) lq += g.mass()[i] * std::pow(std::abs(w[i]), 6.0);
  return std::pow(lq, 1.0 / 6.0) / std::sqrt(weighted_norm_sq(g, w));
}

}  // namespace

TEST_CASE("C1 estimate dominates explicit trial functions") {
  const auto o = coarse();
  int iterations = 0;
  const double c1 = estimate_C1(kOmega, o, &iterations);
  CHECK(iterations > 0);
  CHECK(iterations < o.max_iterations);
  CHECK(std::isfinite(c1));
  for (const double s2 : {0.05, 0.1, 0.3, 1.0}) {
    CAPTURE(s2);
    CHECK(c1 >= gaussian_quotient(o, 0.5 * o.length, s2) * (1.0 - 1e-12));
    CHECK(c1 >= gaussian_quotient(o, 1.0, s2) * (1.0 - 1e-12));
  }
}

TEST_CASE("C2 estimate dominates the constant function") {
  // constants give |D|^{1/m - 1/p} with m = 3, p = 8/5 for n = 3
  const double x0 = 0.5;
  const double measure = x0 * kOmega.measure();
  const double constants = std::pow(measure, 1.0 / 3.0 - 5.0 / 8.0);
  const double c2 = estimate_C2(kOmega, x0, coarse());
  CHECK(c2 >= constants);
  CHECK_THROWS_AS(estimate_C2(kOmega, 0.0, coarse()), ValidationError);
}

TEST_CASE("estimated constants carry their provenance") {
  const auto sc = estimate_sobolev_constants(kOmega, 0.5, coarse());
  CHECK(sc.provenance == SobolevConstants::Provenance::Estimated);
  CHECK(sc.C1 > 0.0);
  CHECK(sc.C2 > 0.0);
  CHECK(to_string(sc.provenance) != to_string(SobolevConstants::Provenance::Configured));
}
