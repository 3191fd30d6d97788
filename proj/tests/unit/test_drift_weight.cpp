#include <doctest.h>

#include "front_blocker/drift_weight.hpp"
#include "front_blocker/error.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

using namespace front_blocker;

namespace {

const CrossSection kOmega({0.5, 0.5});
const std::vector<double> kMid{0.25, 0.25};

// \int_{-eps}^0 exp(r C (x + eps) / eps) dx times |Omega|
double concentrated_exp_integral(double measure, double eps, double C, double r) {
  return measure * eps * (std::exp(r * C) - 1.0) / (r * C);
}

}  // namespace

TEST_CASE("cross-section validation") {
  CHECK(kOmega.measure() == doctest::Approx(0.25));
  CHECK(kOmega.ambient_dim() == 3);
  CHECK_THROWS_AS(CrossSection({1.0}), ValidationError);
  CHECK_THROWS_AS(CrossSection({1.0, -1.0}), ValidationError);
}

TEST_CASE("line integral examples") {
  const auto z = DriftField::zero(1.0);
  CHECK(z.line_integral_k1(-0.3, kMid) == 0.0);
  const auto d = DriftField::concentrated(0.2, 3.0);
  CHECK(d.line_integral_k1(0.0, kMid) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(d.line_integral_k1(-0.1, kMid) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(d.line_integral_k1(5.0, kMid) == doctest::Approx(3.0));
  CHECK(d.line_integral_k1(-5.0, kMid) == 0.0);
}

TEST_CASE("k vanishes outside the support and psi is constant there") {
  const double h = 1e-4;
  for (const auto& d : {DriftField::concentrated(0.3, 2.0), DriftField::axial_bump({-1.0, -0.5, 0.0}, {0.0, 2.0, 1.0})}) {
    for (double x : {-3.0, -1.5, 0.5, 2.0}) {
      const double fd = (d.H(x + h, kMid) - d.H(x - h, kMid)) / (2.0 * h);
      CHECK(std::abs(fd) < 1e-10);
      CHECK(d.k1(x, kMid) == 0.0);
    }
    CHECK(d.psi(-10.0, kMid) == 1.0);
    CHECK(d.psi(1.0, kMid) == d.psi(5.0, kMid));
  }
}

TEST_CASE("potential consistency: central differences of H reproduce k") {
  const auto d = DriftField::axial_bump({-1.0, -0.6, -0.2, 0.0}, {0.5, 2.0, -1.0, 0.3});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-0.99, -0.01);
  const std::vector<double> knots{-1.0, -0.6, -0.2, 0.0};
  for (int i = 0; i < 50; ++i) {
    const double s = x(rng);
    for (double h : {1e-2, 5e-3}) {
      bool near_knot = false;
      for (double kn : knots) near_knot = near_knot || std::abs(s - kn) < 2.0 * h;
      if (near_knot) continue;
      // H is quadratic between knots, so the central difference is exact up to rounding
      const double fd = (d.H(s + h, kMid) - d.H(s - h, kMid)) / (2.0 * h);
      CHECK(fd == doctest::Approx(d.k1(s, kMid)).epsilon(1e-9));
    }
  }
}

TEST_CASE("weight factorization psi = exp(-line integral)") {
  const auto d = DriftField::axial_bump({-2.0, -1.0, 0.0}, {1.0, -0.5, 0.7});
  for (double x = -2.0; x <= 0.0; x += 0.01) CHECK(d.psi(x, kMid) == doctest::Approx(std::exp(-d.line_integral_k1(x, kMid))));
}

TEST_CASE("summaries of the zero drift") {
  const auto s = summarize(DriftField::zero(1.5), kOmega, {2.0, 4.0});
  CHECK(s.net_drift == 0.0);
  CHECK(s.sup_exp_neg == 1.0);
  CHECK(s.exp_integral(2.0) == doctest::Approx(1.5 * 0.25).epsilon(1e-14));
  CHECK(s.exp_integral(4.0) == doctest::Approx(1.5 * 0.25).epsilon(1e-14));
  CHECK(s.psi_ratio == 1.0);
  CHECK_THROWS_AS(s.exp_integral(3.0), std::out_of_range);
}

TEST_CASE("concentrated summaries match the closed form") {
  for (double eps : {0.05, 0.5}) {
    for (double C : {0.5, 3.0, 5.0}) {
      const auto s = summarize(DriftField::concentrated(eps, C), kOmega, {4.0});
      CHECK(s.net_drift == doctest::Approx(C).epsilon(1e-14));
      CHECK(s.sup_exp_neg == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(s.exp_integral(4.0) == doctest::Approx(concentrated_exp_integral(0.25, eps, C, 4.0)).epsilon(1e-6));
      CHECK(s.psi_ratio == doctest::Approx(std::exp(-s.net_drift)).epsilon(1e-12));
    }
  }
}

TEST_CASE("axial bump with g = 1") {
  const auto s = summarize(DriftField::axial_bump({-1.0, 0.0}, {1.0, 1.0}), kOmega, {2.0});
  CHECK(s.net_drift == doctest::Approx(1.0));
  CHECK(s.sup_exp_neg == doctest::Approx(1.0));
  CHECK(s.exp_integral(2.0) == doctest::Approx(0.25 * (std::exp(2.0) - 1.0) / 2.0).epsilon(1e-8));
}

TEST_CASE("negating the drift negates net drift") {
  const auto d = DriftField::axial_bump({-1.0, -0.5, 0.0}, {0.2, 1.5, 0.4});
  const auto s = summarize(d, kOmega, {});
  const auto m = summarize(d.scaled(-1.0), kOmega, {});
  CHECK(m.net_drift == doctest::Approx(-s.net_drift));
  // H is monotone here, so sup exp(+H) = exp(net) and sup exp(-(-H)) equals it
  CHECK(m.sup_exp_neg == doctest::Approx(std::exp(s.net_drift)));
  CHECK(s.sup_exp_neg == doctest::Approx(1.0));
}

TEST_CASE("sup picks up an interior minimum of H") {
  // g < 0 then > 0: H dips to -0.25 at x = -0.5
  const auto d = DriftField::axial_bump({-1.0, -0.5, 0.0}, {-1.0, 0.0, 1.0});
  const auto s = summarize(d, kOmega, {});
  CHECK(s.sup_exp_neg == doctest::Approx(std::exp(0.25)).epsilon(1e-10));
}

TEST_CASE("concentrated summaries approach the zero drift as C -> 0") {
  const auto z = summarize(DriftField::zero(0.4), kOmega, {4.0});
  double prev = 1e300;
  for (double C : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto s = summarize(DriftField::concentrated(0.4, C), kOmega, {4.0});
    const double gap = std::abs(s.exp_integral(4.0) - z.exp_integral(4.0)) + std::abs(s.net_drift);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("gauge shift changes psi but no summary field") {
  const auto d = DriftField::concentrated(0.5, 5.0);
  const auto g = d.with_gauge_shift(7.3);
  CHECK(g.psi(-2.0, kMid) == doctest::Approx(std::exp(-7.3)));
  const auto a = summarize(d, kOmega, {4.0});
  const auto b = summarize(g, kOmega, {4.0});
  CHECK(a.net_drift == b.net_drift);
  CHECK(a.sup_exp_neg == b.sup_exp_neg);
  CHECK(a.exp_integral(4.0) == b.exp_integral(4.0));
  CHECK(a.psi_ratio == b.psi_ratio);
}

TEST_CASE("grid potential agrees with the equivalent axial drift") {
  // H(x1, y) = x1 + 1 on [-1, 0], sampled on a 5 x 3 x 3 grid
  std::vector<std::vector<double>> axes{{-1.0, -0.75, -0.5, -0.25, 0.0}, {0.0, 0.25, 0.5}, {0.0, 0.25, 0.5}};
  std::vector<double> values;
  for (double x : axes[0]) {
    for (std::size_t j = 0; j < 9; ++j) values.push_back(x + 1.0 + 2.0);
  }
  const auto d = DriftField::grid(axes, values);
  CHECK(d.gauge() == doctest::Approx(2.0));
  CHECK(d.k1(-0.3, kMid) == doctest::Approx(1.0));
  const auto s = summarize(d, kOmega, {2.0});
  CHECK(s.net_drift == doctest::Approx(1.0));
  CHECK(s.exp_integral(2.0) == doctest::Approx(0.25 * (std::exp(2.0) - 1.0) / 2.0).epsilon(1e-8));
  CHECK(s.psi_ratio == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("grid potential with lateral structure") {
  // H = (x1 + 1)(1 + y1 y2) is not constant at x1 = 0, so it is rejected
  std::vector<std::vector<double>> axes{{-1.0, 0.0}, {0.0, 0.5}, {0.0, 0.5}};
  std::vector<double> bad{0, 0, 0, 0, 1, 1, 1, 1.25};
  CHECK_THROWS_AS(DriftField::grid(axes, bad), ValidationError);
  // bump in the interior varying with y
  std::vector<std::vector<double>> ax2{{-1.0, -0.5, 0.0}, {0.0, 0.5}, {0.0, 0.5}};
  std::vector<double> vals{0, 0, 0, 0, 0.2, 0.6, 0.6, 1.0, 1, 1, 1, 1};
  const auto d = DriftField::grid(ax2, vals);
  const auto s = summarize(d, kOmega, {4.0});
  CHECK(s.net_drift == doctest::Approx(1.0));
  const double h = 1e-6;
  const std::vector<double> y{0.2, 0.3};
  const std::vector<double> yp{0.2 + h, 0.3};
  const std::vector<double> ym{0.2 - h, 0.3};
  const auto k = d.k(-0.7, y);
  CHECK(k[1] == doctest::Approx((d.H(-0.7, yp) - d.H(-0.7, ym)) / (2 * h)).epsilon(1e-6));
  CHECK(d.max_abs_k() > 0.0);
}

TEST_CASE("grid potential from CSV") {
  const auto path = std::filesystem::temp_directory_path() / "fb_grid_potential.csv";
  {
    std::ofstream out(path);
    out << "x1,y1,y2,H\n";
    for (double x : {-1.0, -0.5, 0.0})
      for (double y1 : {0.0, 0.5})
        for (double y2 : {0.0, 0.5}) out << x << "," << y1 << "," << y2 << "," << 2.0 * (x + 1.0) << "\n";
  }
  const auto d = DriftField::grid_from_csv(path);
  CHECK(d.x0() == doctest::Approx(1.0));
  CHECK(d.k1(-0.25, kMid) == doctest::Approx(2.0));
  std::filesystem::remove(path);
}
