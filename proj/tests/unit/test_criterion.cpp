#include <doctest.h>

#include "front_blocker/criterion.hpp"
#include "front_blocker/error.hpp"

#include <cmath>
#include <random>

using namespace front_blocker;

namespace {

const CrossSection kOmega({0.5, 0.5});

NonlinearityConstants cubic_constants(double th) {
  return compute_constants(ExtendedNonlinearity(BistableNonlinearity::cubic(th)));
}

DriftSummary synthetic(int n, double net, double S, double E, double x0 = 1.0) {
  DriftSummary s;
  s.net_drift = net;
  s.sup_exp_neg = S;
  s.exp_integrals = {{static_cast<double>(n + 1), E}};
  s.psi_ratio = std::exp(-net);
  s.x0 = x0;
  s.measure = kOmega.measure();
  return s;
}

}  // namespace

TEST_CASE("exponents for n = 3 and n = 4") {
  const auto e3 = exponents_for(3);
  CHECK(e3.q == Rational(6));
  CHECK(e3.p == Rational(8, 5));
  CHECK(e3.m == Rational(3));
  CHECK(e3.j == Rational(8));
  const auto e4 = exponents_for(4);
  CHECK(e4.q == Rational(4));
  CHECK(e4.p == Rational(10, 6));
  CHECK(e4.m == Rational(8, 3));
  CHECK(e4.j == Rational(10));
  CHECK_THROWS_AS(exponents_for(2), ValidationError);
}

TEST_CASE("exponent identities hold exactly") {
  for (int n = 3; n <= 10; ++n) {
    const auto e = exponents_for(n);
    CHECK(Rational(1) / e.p - Rational(1, 2) - Rational(1) / e.j == Rational(0));
    CHECK(Rational(2) / (e.m - 2) == Rational(n - 1));
    CHECK(Rational(2) / (e.q - 2) == Rational(n - 2, 2));
    CHECK(Rational(2) * e.m / (e.j * (e.m - 2)) == Rational(n, n + 1));
    CHECK(e.j / 2 == Rational(n + 1));
    // the Sobolev conjugate of p exceeds m, so W^{1,p} still embeds into L^m on a bounded slab
    CHECK(Rational(n) * e.p / (Rational(n) - e.p) == Rational(2 * n * (n + 1), n * n - 2));
    CHECK(Rational(n) * e.p / (Rational(n) - e.p) > e.m);
  }
}

TEST_CASE("zero-drift delta against a hand evaluation") {
  const auto nc = cubic_constants(0.25);
  const double x0 = 1.0;
  const auto ds = summarize(DriftField::zero(x0), kOmega, {4.0});
  const SobolevConstants sc;
  // alpha = 1/16, gamma = 1/64, f2 = 3.5, mu = 13/24
  const double alpha = 1.0 / 16.0;
  const double A = 3.5 * std::pow((alpha / 4.0) / 3.5, -3.0);
  const double B = 3.5 * std::pow(2.0, 0.375) * 1.0 * std::pow(x0 * 0.25, 3.0 / 8.0);
  const double expected = std::pow(alpha / 2.0, 0.25) * std::pow(std::max(A, std::pow(B, 4.0)), -0.25);
  CHECK(compute_delta(nc, sc, ds, exponents_for(3)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected > 0.0);
}

TEST_CASE("delta is nonincreasing in C1") {
  const auto nc = cubic_constants(0.25);
  const auto ds = summarize(DriftField::concentrated(0.5, 5.0), kOmega, {4.0});
  double prev = 1e300;
  for (double c1 : {0.01, 0.05, 0.2, 1.0, 3.0}) {
    const double d = compute_delta(nc, {c1, 0.05}, ds, exponents_for(3));
    CHECK(d <= prev);
    prev = d;
  }
}

TEST_CASE("delta approaches the drift-free branch as eps -> 0") {
  const auto nc = cubic_constants(0.25);
  const SobolevConstants sc{0.05, 0.05};
  const double alpha = nc.alpha;
  const double A = gamma_tilde(nc, alpha / 4.0, 6.0) * std::pow(0.05, 6.0);
  const double limit = std::pow(alpha / 2.0, 0.25) * std::pow(A, -0.25);
  double prev = 0.0;
  for (double eps : {1.0, 0.3, 0.1, 0.03, 0.01, 1e-3}) {
    const auto ds = summarize(DriftField::concentrated(eps, 2.0), kOmega, {4.0});
    const double d = compute_delta(nc, sc, ds, exponents_for(3));
    CHECK(d >= prev);
    CHECK(d <= limit * (1.0 + 1e-12));
    prev = d;
  }
  CHECK(prev == doctest::Approx(limit).epsilon(1e-12));
}

TEST_CASE("zero-drift regression and form agreement") {
  const auto nc = cubic_constants(0.25);
  const auto ds = summarize(DriftField::zero(1.0), kOmega, {4.0});
  const auto ex = exponents_for(3);
  const double a = optimal_a_closed_form(nc);
  const auto p = evaluate(nc, {}, ds, ex, kOmega, a, CriterionForm::PropositionForm);
  const auto t = evaluate(nc, {}, ds, ex, kOmega, a, CriterionForm::TheoremForm);
  CHECK(p.satisfied == t.satisfied);
  CHECK_FALSE(p.satisfied);  // no drift: rhs has e^0 and the constants dominate
  CHECK(p.rhs == doctest::Approx(t.rhs).epsilon(1e-10));
  CHECK(p.lhs == doctest::Approx(t.lhs).epsilon(1e-12));
  CHECK(p.delta > 0.0);
  CHECK(p.b_interp == doctest::Approx(p.gamma_taylor / p.branch_m));
}

TEST_CASE("intermediate constants") {
  const auto nc = cubic_constants(0.25);
  const auto ds = summarize(DriftField::zero(1.0), kOmega, {4.0});
  const double a = 2.0;
  const auto r = evaluate(nc, {}, ds, exponents_for(3), kOmega, a, CriterionForm::PropositionForm);
  CHECK(r.nu == doctest::Approx(1.0 / 32.0));
  CHECK(r.eta_const == doctest::Approx(1.0 / 64.0));
  CHECK(r.beta == doctest::Approx((0.25 + 2.0 * nc.Fmax) * 0.25));
  CHECK(r.gamma_const == doctest::Approx((0.5 + 2.0 / 3.0) * 0.25));
  CHECK(r.gamma_taylor == doctest::Approx(1.0 / 64.0));
}

TEST_CASE("forms agree on random drift summaries") {
  const auto nc = cubic_constants(0.25);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> net(-2.0, 12.0), logS(0.0, 3.0), logE(-8.0, 20.0), logC(-4.0, 1.0);
  for (int n : {3, 4, 5}) {
    const auto ex = exponents_for(n);
    std::vector<double> lengths(n - 1, 0.5);
    const CrossSection cs(lengths);
    for (int i = 0; i < 100; ++i) {
      const auto ds = synthetic(n, net(rng), std::exp(logS(rng)), std::exp(logE(rng)));
      const SobolevConstants sc{std::exp(logC(rng)), std::exp(logC(rng))};
      const auto p = evaluate(nc, sc, ds, ex, cs, 1.5, CriterionForm::PropositionForm);
      const auto t = evaluate(nc, sc, ds, ex, cs, 1.5, CriterionForm::TheoremForm);
      CHECK(p.satisfied == t.satisfied);
      CHECK(p.rhs == doctest::Approx(t.rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("increasing net drift strictly lowers the right-hand side") {
  const auto nc = cubic_constants(0.25);
  const auto ex = exponents_for(3);
  double prev_rhs = 1e300;
  bool was_satisfied = false;
  for (double net = 0.0; net < 30.0; net += 1.0) {
    const auto r = evaluate(nc, {0.05, 0.05}, synthetic(3, net, 1.0, 0.01), ex, kOmega, 2.0,
                            CriterionForm::PropositionForm);
    CHECK(r.rhs < prev_rhs);
    if (was_satisfied) CHECK(r.satisfied);
    was_satisfied = r.satisfied;
    prev_rhs = r.rhs;
  }
  CHECK(was_satisfied);
}

TEST_CASE("optimize_a recovers the closed-form minimizer") {
  const auto nc = cubic_constants(0.25);
  const auto ds = summarize(DriftField::concentrated(0.5, 5.0), kOmega, {4.0});
  const auto ex = exponents_for(3);
  const SobolevConstants sc{0.05, 0.05};
  // independent: minimize nu(1/a + a/3) + 1/(2a) + a Fmax with nu = 1/32
  const double nu = 1.0 / 32.0;
  const double a_star = std::sqrt((nu + 0.5) / (nu / 3.0 + nc.Fmax));
  CHECK(optimal_a_closed_form(nc) == doctest::Approx(a_star).epsilon(1e-14));
  const auto [a, rep] = optimize_a(nc, sc, ds, ex, kOmega, {0.1, 50.0});
  CHECK(a == doctest::Approx(a_star).epsilon(1e-6));
  const auto at_lo = evaluate(nc, sc, ds, ex, kOmega, 0.1, CriterionForm::PropositionForm);
  const auto at_hi = evaluate(nc, sc, ds, ex, kOmega, 50.0, CriterionForm::PropositionForm);
  CHECK(rep.ratio() >= at_lo.ratio());
  CHECK(rep.ratio() >= at_hi.ratio());
  const auto [a2, rep2] = optimize_a(nc, sc, ds, ex, kOmega, {a_star, a_star});
  CHECK(a2 == a_star);
  CHECK(rep2.lhs == evaluate(nc, sc, ds, ex, kOmega, a_star, CriterionForm::PropositionForm).lhs);
  CHECK_THROWS_AS(optimize_a(nc, sc, ds, ex, kOmega, {2.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(optimize_a(nc, sc, ds, ex, kOmega, {0.0, 1.0}), ValidationError);
}

TEST_CASE("gauge shift leaves the report unchanged") {
  const auto nc = cubic_constants(0.25);
  const auto d = DriftField::concentrated(0.5, 5.0);
  const auto ex = exponents_for(3);
  const auto r0 = evaluate(nc, {0.05, 0.05}, summarize(d, kOmega, {4.0}), ex, kOmega, 3.0, CriterionForm::TheoremForm);
  const auto r1 = evaluate(nc, {0.05, 0.05}, summarize(d.with_gauge_shift(7.3), kOmega, {4.0}), ex, kOmega, 3.0,
                           CriterionForm::TheoremForm);
  CHECK(r0.lhs == r1.lhs);
  CHECK(r0.rhs == r1.rhs);
  CHECK(r0.delta == r1.delta);
  CHECK(r0.delta_strict == r1.delta_strict);
  CHECK(r0.b_interp == r1.b_interp);
}

TEST_CASE("homogeneity audit reproduces the gauge-normalized verdict") {
  const auto nc = cubic_constants(0.25);
  const auto ex = exponents_for(3);
  const double a = optimal_a_closed_form(nc);
  for (const auto& d : {DriftField::concentrated(0.5, 5.0), DriftField::concentrated(0.5, 1.0),
                        DriftField::axial_bump({-1.0, -0.5, 0.0}, {0.0, 8.0, 0.0})}) {
    for (const SobolevConstants sc : {SobolevConstants{0.05, 0.05}, SobolevConstants{1.0, 1.0}}) {
      const auto r = evaluate(nc, sc, summarize(d, kOmega, {4.0}), ex, kOmega, a, CriterionForm::PropositionForm);
      for (double shift : {0.0, 7.3, -3.0}) {
        const auto h = homogeneity_audit(nc, sc, d.with_gauge_shift(shift), ex, kOmega, a);
        CHECK(h.satisfied == r.satisfied);
        CHECK(h.psi_minus_x0 == doctest::Approx(std::exp(-shift)));
        // eta delta^2 / ((nu gamma + beta) psi(0)) is gauge free
        CHECK(h.lhs / h.rhs == doctest::Approx(r.lhs / r.rhs).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("strict delta differs from the primary one by the interpolation factor") {
  const auto nc = cubic_constants(0.25);
  const auto ds = summarize(DriftField::zero(1.0), kOmega, {4.0});
  const auto r = evaluate(nc, {}, ds, exponents_for(3), kOmega, 1.0, CriterionForm::PropositionForm);
  CHECK(r.delta_strict > 0.0);
  CHECK(r.delta_definition > 0.0);
  CHECK(r.delta_strict != r.delta);
}

TEST_CASE("concentrated closed form agrees with quadrature") {
  const auto nc = cubic_constants(0.25);
  for (double eps : {0.01, 0.1, 0.5}) {
    for (double C : {0.5, 2.0, 5.0, 8.0}) {
      const auto r = concentrated_thresholds(3, nc, {0.05, 0.05}, kOmega, eps, C, 3.0);
      CHECK(r.exp_integral_quadrature == doctest::Approx(r.exp_integral_closed).epsilon(1e-6));
      CHECK(r.agree);
      if (r.remark_sufficient) CHECK(r.closed_form_satisfied);
    }
  }
}

TEST_CASE("eps threshold at C = 5, n = 3, theta = 0.25, C1 = C2 = 1") {
  const auto nc = cubic_constants(0.25);
  const auto r = concentrated_thresholds(3, nc, {}, kOmega, 0.1, 5.0, 1.0);
  // independent inversion of C2/C3 > (|Omega| eps (e^{4C} - 1)/(4C))^{3/4}
  const double alpha = 1.0 / 16.0;
  const double C2T = std::pow(3.5 * std::pow((alpha / 4.0) / 3.5, -3.0), 0.5);
  const double C3T = std::pow(3.5 * std::pow(2.0, 0.375), 2.0);
  const double growth = (std::exp(20.0) - 1.0) / 20.0;
  const double eps_star = std::pow(C2T / C3T, 4.0 / 3.0) / (0.25 * growth);
  CHECK(r.eps_star == doctest::Approx(eps_star).epsilon(1e-10));
  CHECK(r.eps_star_bisection == doctest::Approx(eps_star).epsilon(1e-10));
  CHECK(r.eps_star == doctest::Approx(1.3604e-4).epsilon(1e-3));
  CHECK_FALSE(r.condition_ii);
}

TEST_CASE("large C with small eps satisfies the criterion") {
  const auto nc = cubic_constants(0.25);
  const auto r = concentrated_thresholds(3, nc, {0.05, 0.05}, kOmega, 0.5, 5.0, optimal_a_closed_form(nc));
  CHECK(r.quadrature.satisfied);
  CHECK(r.closed_form_satisfied);
  const auto weak = concentrated_thresholds(3, nc, {0.05, 0.05}, kOmega, 0.5, 0.5, optimal_a_closed_form(nc));
  CHECK_FALSE(weak.quadrature.satisfied);
}

TEST_CASE("C -> 0 reduces to the drift-free comparison") {
  const auto nc = cubic_constants(0.25);
  const auto r = concentrated_thresholds(3, nc, {}, kOmega, 0.5, 1e-9, 1.0);
  const auto z = evaluate(nc, {}, summarize(DriftField::zero(0.5), kOmega, {4.0}), exponents_for(3), kOmega, 1.0,
                          CriterionForm::TheoremForm);
  CHECK(r.quadrature.rhs == doctest::Approx(z.rhs).epsilon(1e-6));
  CHECK(r.quadrature.satisfied == z.satisfied);
}
