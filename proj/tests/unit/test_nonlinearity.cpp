#include <doctest.h>

#include "front_blocker/error.hpp"
#include "front_blocker/nonlinearity.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace front_blocker;

namespace {

// Closed forms for the cubic u(1-u)(u-theta), written independently of the library.
double cubic_f(double th, double u) { return u * (1.0 - u) * (u - th); }
double cubic_antiderivative(double th, double u) {
  return -std::pow(u, 4) / 4.0 + (1.0 + th) * std::pow(u, 3) / 3.0 - th * u * u / 2.0;
}
double cubic_F(double th, double s) {
  if (s < 0.0) return cubic_antiderivative(th, 1.0) - cubic_antiderivative(th, 0.0) + 0.5 * th * s * s;
  if (s > 1.0) return 0.5 * (1.0 - th) * (s - 1.0) * (s - 1.0);
  return cubic_antiderivative(th, 1.0) - cubic_antiderivative(th, s);
}

ExtendedNonlinearity cubic(double th) { return ExtendedNonlinearity(BistableNonlinearity::cubic(th)); }

bool message_contains(const std::exception& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("cubic integral and roots") {
  const auto nl = cubic(0.25);
  CHECK(eval_F(nl, 0.0) == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
  CHECK(nl.f(0.0) == 0.0);
  CHECK(nl.f(1.0) == 0.0);
  CHECK(std::abs(nl.f(0.25)) < 1e-15);
  for (double th : {0.05, 0.2, 0.3, 0.45}) {
    CHECK(eval_F(cubic(th), 0.0) == doctest::Approx((1.0 - 2.0 * th) / 12.0).epsilon(1e-13));
  }
}

TEST_CASE("cubic rejects theta outside (0, 1/2) naming the assumption") {
  try {
    (void)BistableNonlinearity::cubic(0.5);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(message_contains(e, "F8"));
  }
  CHECK_THROWS_AS((void)BistableNonlinearity::cubic(0.0), ValidationError);
  CHECK_THROWS_AS((void)BistableNonlinearity::cubic(1.2), ValidationError);
  CHECK_NOTHROW((void)BistableNonlinearity::cubic(0.6, BistableNonlinearity::Checks::SkipPositiveMass));
}

TEST_CASE("eval_F examples") {
  const auto nl = cubic(0.25);
  CHECK(eval_F(nl, 1.0) == 0.0);
  CHECK(eval_F(nl, 2.0) == doctest::Approx(0.375).epsilon(1e-14));
  for (double s = -4.0; s <= 4.0; s += 0.0625) {
    CHECK(eval_F(nl, s) == doctest::Approx(cubic_F(0.25, s)).epsilon(1e-12));
  }
}

TEST_CASE("F' = -f on the real line") {
  const auto nl = cubic(0.3);
  const double h = 1e-5;
  for (double s = -2.0; s <= 3.0; s += 0.173) {
    const double d = (nl.F(s + h) - nl.F(s - h)) / (2.0 * h);
    CHECK(d == doctest::Approx(-nl.f(s)).epsilon(1e-7));
  }
}

TEST_CASE("extension is continuous with Lipschitz derivative") {
  const auto nl = cubic(0.25);
  for (double s : {0.0, 1.0}) {
    CHECK(std::abs(nl.f(s + 1e-9) - nl.f(s - 1e-9)) < 1e-8);
    CHECK(std::abs(nl.f_prime(s + 1e-9) - nl.f_prime(s - 1e-9)) < 1e-8);
  }
  CHECK(nl.f(-2.0) == doctest::Approx(-0.25 * -2.0));
  CHECK(nl.f(3.0) == doctest::Approx(-0.75 * 2.0));
}

TEST_CASE("constants at theta = 0.25") {
  const auto c = compute_constants(cubic(0.25));
  CHECK(c.alpha == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(c.mu == doctest::Approx(13.0 / 24.0).epsilon(1e-14));
  CHECK(c.f2_inf == doctest::Approx(3.5).epsilon(1e-14));
  CHECK(c.F0 == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
  CHECK(c.Fmax == doctest::Approx(cubic_F(0.25, 0.25)).epsilon(1e-13));
  // brute-force infimum of F(s)/(s-1)^2; the closed form on s < 0 is
  // a F0 / (a + F0) with a = theta / 2, which is 1/32 here
  double brute = 1e300;
  for (double s = -50.0; s <= 50.0; s += 1e-4) {
    if (std::abs(s - 1.0) < 1e-6) continue;
    brute = std::min(brute, cubic_F(0.25, s) / ((s - 1.0) * (s - 1.0)));
  }
  CHECK(c.K == doctest::Approx(brute).epsilon(1e-7));
  CHECK(c.K == doctest::Approx(1.0 / 32.0).epsilon(1e-9));
}

TEST_CASE("F(s) >= K (s-1)^2 on a dense grid") {
  for (double th : {0.1, 0.25, 0.4}) {
    const auto nl = cubic(th);
    const auto c = compute_constants(nl);
    CHECK(c.K > 0.0);
    for (double s = -5.0; s <= 5.0; s += 1e-3) {
      CHECK(nl.F(s) >= c.K * (s - 1.0) * (s - 1.0) - 1e-14);
    }
  }
}

TEST_CASE("alpha nondecreasing in theta up to the cap") {
  double prev = 0.0;
  for (double th = 0.01; th < 0.5; th += 0.01) {
    const double a = compute_constants(cubic(th)).alpha;
    CHECK(a >= prev);
    CHECK(a <= 0.25);
    prev = a;
  }
}

TEST_CASE("gamma_tilde examples") {
  const auto c = compute_constants(cubic(0.25));
  CHECK(gamma_tilde(c, 1.0, 3.0) == doctest::Approx(3.5));
  CHECK(gamma_tilde(c, 0.015625, 6.0) == doctest::Approx(3.5 * 224.0 * 224.0 * 224.0).epsilon(1e-12));
  CHECK(gamma_tilde(c, 3.5, 6.0) == doctest::Approx(3.5));
}

TEST_CASE("eta_remainder_bound examples") {
  const auto c = compute_constants(cubic(0.25));
  CHECK(eta_remainder_bound(c, -1.0) == 0.0);
  CHECK(eta_remainder_bound(c, 0.5) == doctest::Approx(0.4375));
  CHECK(eta_remainder_bound(c, 2.0) == doctest::Approx(13.0 / 6.0));
}

TEST_CASE("Taylor remainder vanishes for s <= 0 and obeys its envelope") {
  for (double th : {0.1, 0.25, 0.4}) {
    const auto nl = cubic(th);
    const auto c = compute_constants(nl);
    for (double s = -5.0; s <= 0.0; s += 1e-3) CHECK(std::abs(nl.taylor_remainder(s)) <= 1e-12);
    for (double s = -5.0; s <= 5.0; s += 1e-3) {
      CHECK(std::abs(nl.taylor_remainder(s)) <= eta_remainder_bound(c, s) + 1e-12);
    }
  }
}

TEST_CASE("remainder is dominated by gamma s^2 + gamma_tilde |s|^q") {
  const auto nl = cubic(0.25);
  const auto c = compute_constants(nl);
  for (double gamma : {0.015625, 0.1, 1.0, 5.0}) {
    for (double q : {2.5, 3.0, 8.0 / 3.0, 4.0, 6.0}) {
      const double gt = gamma_tilde(c, gamma, q);
      for (double s = -5.0; s <= 5.0; s += 2e-3) {
        const double lhs = std::abs(nl.taylor_remainder(s));
        CHECK(lhs <= gamma * s * s + gt * std::pow(std::abs(s), q) + 1e-12);
      }
    }
  }
}

TEST_CASE("tabulated cubic reproduces closed-form constants") {
  const double th = 0.25;
  std::vector<double> u, f;
  for (int i = 0; i <= 400; ++i) {
    u.push_back(i / 400.0);
    f.push_back(cubic_f(th, u.back()));
  }
  const ExtendedNonlinearity nl(BistableNonlinearity::tabulated(u, f));
  CHECK(nl.theta() == doctest::Approx(th).epsilon(1e-9));
  CHECK(nl.F0() == doctest::Approx(1.0 / 24.0).epsilon(1e-6));
  CHECK(nl.slope_at_zero() == doctest::Approx(-th).epsilon(1e-4));
  CHECK(nl.slope_at_one() == doctest::Approx(-(1.0 - th)).epsilon(1e-4));
  const auto c = compute_constants(nl);
  CHECK(c.K == doctest::Approx(1.0 / 32.0).epsilon(1e-3));
  CHECK(c.mu == doctest::Approx(13.0 / 24.0).epsilon(1e-4));
}

TEST_CASE("tabulated validation names violated assumptions") {
  std::vector<double> u{0.0, 0.25, 0.5, 0.75, 1.0};
  try {
    (void)BistableNonlinearity::tabulated(u, {0.1, -0.1, 0.1, 0.1, 0.0});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(message_contains(e, "F2"));
  }
  try {
    // negative mass: mirror image of a theta = 0.75 cubic
    std::vector<double> uu, ff;
    for (int i = 0; i <= 100; ++i) {
      uu.push_back(i / 100.0);
      ff.push_back(cubic_f(0.75, uu.back()));
    }
    (void)BistableNonlinearity::tabulated(uu, ff);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(message_contains(e, "F8"));
  }
}

TEST_CASE("tabulated nonlinearity from CSV") {
  const auto path = std::filesystem::temp_directory_path() / "fb_nonlinearity_test.csv";
  {
    std::ofstream out(path);
    out << "# bistable table\nu,f\n";
    for (int i = 0; i <= 200; ++i) out << i / 200.0 << "," << cubic_f(0.3, i / 200.0) << "\n";
  }
  const auto nl = BistableNonlinearity::from_csv(path);
  CHECK(nl.kind() == BistableNonlinearity::Kind::Tabulated);
  CHECK(nl.theta() == doctest::Approx(0.3).epsilon(1e-8));
  std::filesystem::remove(path);
}
