#include "front_blocker/criterion.hpp"

#include "front_blocker/error.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace front_blocker {

namespace {

double rpow(double base, const Rational& e) { return std::pow(base, Exponents::d(e)); }

// Quantities shared by both forms.
struct Core {
  double qd, md, jd;
  double S, E, net;
  double gt_q, gt_m;
  double two_pow;      // 2^{(2-p)m/(2p)}
  double G;            // gamma~(alpha/4, m) C2^m 2^{(2-p)m/(2p)}
  double branch_q, branch_m;
  double log_max;      // log max{branch_q, branch_m^{(q-2)/(m-2)}}
};

Core core(const NonlinearityConstants& nc, const SobolevConstants& sc, const DriftSummary& ds, const Exponents& ex) {
  if (!(sc.C1 > 0.0) || !(sc.C2 > 0.0)) throw ValidationError("Sobolev constants must be positive");
  Core c{};
  c.qd = Exponents::d(ex.q);
  c.md = Exponents::d(ex.m);
  c.jd = Exponents::d(ex.j);
  c.S = ds.sup_exp_neg;
  c.E = ds.exp_integral(Exponents::d(ex.j / 2));
  c.net = ds.net_drift;
  const double g = nc.alpha / 4.0;
  c.gt_q = gamma_tilde(nc, g, c.qd);
  c.gt_m = gamma_tilde(nc, g, c.md);
  c.two_pow = rpow(2.0, (2 - ex.p) * ex.m / (2 * ex.p));
  c.G = c.gt_m * std::pow(sc.C2, c.md) * c.two_pow;
  c.branch_q = c.gt_q * std::pow(sc.C1, c.qd);
  c.branch_m = c.G * c.S * rpow(c.E, ex.m / ex.j);
  c.log_max = std::max(std::log(c.branch_q), Exponents::d((ex.q - 2) / (ex.m - 2)) * std::log(c.branch_m));
  return c;
}

double ramp_denominator(const NonlinearityConstants& nc, double measure, double a, double* nu_out = nullptr,
                        double* beta_out = nullptr, double* gamma_out = nullptr) {
  const double nu = std::min(nc.K, 0.5);
  const double beta = (1.0 / (2.0 * a) + a * nc.Fmax) * measure;
  const double gamma = (1.0 / a + a / 3.0) * measure;
  if (nu_out) *nu_out = nu;
  if (beta_out) *beta_out = beta;
  if (gamma_out) *gamma_out = gamma;
  return nu * gamma + beta;
}

}  // namespace

Exponents exponents_for(int n) {
  if (n < 3) throw ValidationError("dimension n = " + std::to_string(n) + " < 3: the criterion requires n >= 3");
  Exponents e;
  e.n = n;
  e.q = Rational(2 * n, n - 2);
  e.p = Rational(2 * (n + 1), n + 2);
  e.m = Rational(2 * n, n - 1);
  e.j = Rational(2 * (n + 1));
  // m is fixed as 2n/(n-1); the Sobolev conjugate np/(n-p) of this p is 2n(n+1)/(n^2-2), larger than m,
  // so the embedding into L^m holds on the bounded slab but m is not the critical exponent.
  if (Rational(1) / e.p != Rational(1, 2) + Rational(1) / e.j ||
      !(Rational(2) < e.m && e.m < e.q)) {
    throw InternalError("exponent identities failed for n = " + std::to_string(n));
  }
  return e;
}

std::string to_string(CriterionForm form) {
  return form == CriterionForm::TheoremForm ? "theorem" : "prop";
}

std::string to_string(SobolevConstants::Provenance p) {
  return p == SobolevConstants::Provenance::Configured ? "configured" : "estimated";
}

double compute_delta(const NonlinearityConstants& nc, const SobolevConstants& sc, const DriftSummary& ds,
                     const Exponents& ex) {
  const Core c = core(nc, sc, ds, ex);
  const double inv = 1.0 / (c.qd - 2.0);
  return std::exp(inv * (std::log(nc.alpha / 2.0) - c.log_max));
}

CriterionReport evaluate(const NonlinearityConstants& nc, const SobolevConstants& sc, const DriftSummary& ds,
                         const Exponents& ex, const CrossSection& cs, double a, CriterionForm form) {
  if (!(a > 0.0)) throw ValidationError("auxiliary length a must be positive");
  const Core c = core(nc, sc, ds, ex);
  CriterionReport r;
  r.form = form;
  r.exponents = ex;
  r.C1 = sc.C1;
  r.C2 = sc.C2;
  r.provenance = sc.provenance;
  r.net_drift = c.net;
  r.sup_exp_neg = c.S;
  r.exp_integral = c.E;
  r.measure = cs.measure();
  r.alpha = nc.alpha;
  r.K = nc.K;
  r.Fmax = nc.Fmax;

  const double g = nc.alpha / 4.0;
  r.gamma_taylor = g;
  r.gamma_tilde_q = c.gt_q;
  r.gamma_tilde_m = c.gt_m;
  r.branch_q = c.branch_q;
  r.branch_m = c.branch_m;
  r.b_interp = g / c.branch_m;

  const double inv = 1.0 / (c.qd - 2.0);
  const double qm = Exponents::d((ex.q - 2) / (ex.m - 2));
  r.delta = std::exp(inv * (std::log(nc.alpha / 2.0) - c.log_max));
  {
    const double gt_m_def = gamma_tilde(nc, nc.alpha / 2.0, c.md);
    const double two_def = rpow(2.0, (2 - ex.q) * ex.m / (2 * ex.p));
    const double bm = gt_m_def * std::pow(sc.C2, c.md) * two_def * c.S * rpow(c.E, ex.m / ex.j);
    const double lm = std::max(std::log(c.branch_q), qm * std::log(bm));
    r.delta_definition = std::exp(inv * (std::log(nc.alpha / 2.0) - lm));
  }
  {
    // Q b^{(m-q)/(m-2)} with b = (alpha/4)/Q equals (alpha/4)^{(m-q)/(m-2)} Q^{(q-2)/(m-2)}
    const double lm = std::max(std::log(c.branch_q),
                               Exponents::d((ex.m - ex.q) / (ex.m - 2)) * std::log(g) + qm * std::log(c.branch_m));
    r.delta_strict = std::exp(inv * (std::log(g) - lm));
  }

  r.a_used = a;
  const double denom = ramp_denominator(nc, cs.measure(), a, &r.nu, &r.beta, &r.gamma_const);
  r.eta_const = std::min(r.nu / 2.0, nc.alpha);
  r.margin_primary_delta = r.eta_const * r.delta * r.delta - denom * std::exp(-c.net);

  // Theorem form: 2/(q-2) = (n-2)/2, 2/(m-2) = n-1, 2m/(j(m-2)) = n/(n+1)
  const int n = ex.n;
  r.theorem_C1 = r.eta_const / denom * std::pow(g, (n - 2) / 2.0);
  r.theorem_C2 = std::pow(c.branch_q, (n - 2) / 2.0);
  r.theorem_C3 = std::pow(c.G, n - 1);

  if (form == CriterionForm::PropositionForm) {
    r.lhs = r.eta_const / denom * std::exp(2.0 * inv * std::log(g));
    r.rhs = std::exp(-c.net + 2.0 * inv * c.log_max);
  } else {
    r.lhs = r.theorem_C1;
    const double second = r.theorem_C3 * std::pow(c.S, n - 1) * std::pow(c.E, static_cast<double>(n) / (n + 1));
    r.rhs = std::exp(-c.net) * std::max(r.theorem_C2, second);
  }
  r.satisfied = r.lhs > r.rhs;
  return r;
}

double optimal_a_closed_form(const NonlinearityConstants& nc) {
  const double nu = std::min(nc.K, 0.5);
  return std::sqrt((nu + 0.5) / (nu / 3.0 + nc.Fmax));
}

std::pair<double, CriterionReport> optimize_a(const NonlinearityConstants& nc, const SobolevConstants& sc,
                                              const DriftSummary& ds, const Exponents& ex, const CrossSection& cs,
                                              std::pair<double, double> a_range, CriterionForm form) {
  const auto [lo, hi] = a_range;
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    std::ostringstream msg;
    msg << "degenerate a range [" << lo << ", " << hi << "]";
    throw ValidationError(msg.str());
  }
  if (hi == lo) return {lo, evaluate(nc, sc, ds, ex, cs, lo, form)};
  // lhs/rhs in log a; rhs does not depend on a
  auto neg_log_ratio = [&](double la) {
    const auto r = evaluate(nc, sc, ds, ex, cs, std::exp(la), CriterionForm::PropositionForm);
    return -(std::log(r.lhs) - std::log(r.rhs));
  };
  const auto best = boost::math::tools::brent_find_minima(neg_log_ratio, std::log(lo), std::log(hi), 52);
  double a = std::exp(best.first);
  // endpoints win ties against the interior estimate
  for (double cand : {lo, hi}) {
    if (neg_log_ratio(std::log(cand)) < neg_log_ratio(std::log(a))) a = cand;
  }
  return {a, evaluate(nc, sc, ds, ex, cs, a, form)};
}

HomogeneityAudit homogeneity_audit(const NonlinearityConstants& nc, const SobolevConstants& sc, const DriftField& d,
                                   const Exponents& ex, const CrossSection& cs, double a,
                                   const SummaryOptions& options) {
  std::vector<double> ymid(cs.dim());
  for (int i = 0; i < cs.dim(); ++i) ymid[i] = 0.5 * cs.lengths()[i];
  HomogeneityAudit h;
  h.psi_minus_x0 = d.psi(-d.x0(), ymid);
  h.psi_zero = d.psi(0.0, ymid);

  // sup of psi over the slab: dense axial samples plus breakpoints; for grid
  // potentials the vertices suffice (multilinear cells)
  double sup = 0.0;
  if (d.is_axial()) {
    std::vector<double> xs = d.axial_breaks();
    const int N = 1 << 14;
    for (int i = 0; i <= N; ++i) xs.push_back(-d.x0() + d.x0() * i / N);
    for (double x : xs) sup = std::max(sup, d.psi(x, ymid));
  } else {
    std::vector<std::vector<double>> axes{d.axial_breaks()};
    for (int i = 0; i < cs.dim(); ++i) axes.push_back(d.cross_breaks(i));
    std::vector<std::size_t> idx(axes.size(), 0);
    std::vector<double> y(cs.dim());
    for (bool done = false; !done;) {
      for (int i = 0; i < cs.dim(); ++i) y[i] = axes[i + 1][idx[i + 1]];
      sup = std::max(sup, d.psi(axes[0][idx[0]], y));
      std::size_t i = axes.size();
      done = true;
      while (i-- > 0) {
        if (++idx[i] < axes[i].size()) {
          done = false;
          break;
        }
        idx[i] = 0;
      }
    }
  }
  h.psi_sup = sup;
  const double jd = Exponents::d(ex.j);
  const double integral = integrate_slab(
      d, cs, [&](double x1, std::span<const double> y) { return std::pow(d.psi(x1, y), -jd / 2.0); }, options,
      "psi^{-j/2}");
  h.psi_inv_norm = std::pow(integral, 1.0 / jd);

  const double qd = Exponents::d(ex.q);
  const double md = Exponents::d(ex.m);
  const double g = nc.alpha / 4.0;
  const double branch_q = gamma_tilde(nc, g, qd) * std::pow(h.psi_minus_x0, 1.0 - qd / 2.0) * std::pow(sc.C1, qd);
  const double Q = gamma_tilde(nc, g, md) * std::pow(sc.C2, md) * rpow(2.0, (2 - ex.p) * ex.m / (2 * ex.p)) *
                   h.psi_sup * std::pow(h.psi_inv_norm, md);
  const double inv = 1.0 / (qd - 2.0);
  const double lm = std::max(std::log(branch_q), Exponents::d((ex.q - 2) / (ex.m - 2)) * std::log(Q));
  h.delta = std::exp(inv * (std::log(g) - lm));
  double nu = 0.0;
  const double denom = ramp_denominator(nc, cs.measure(), a, &nu);
  const double eta = std::min(nu / 2.0, nc.alpha);
  h.lhs = eta * h.delta * h.delta;
  h.rhs = denom * h.psi_zero;
  h.satisfied = h.lhs > h.rhs;
  return h;
}

ConcentratedReport concentrated_thresholds(int n, const NonlinearityConstants& nc, const SobolevConstants& sc,
                                           const CrossSection& cs, double eps, double C, double a) {
  if (!(eps > 0.0) || !(C > 0.0)) throw ValidationError("concentrated thresholds need eps > 0 and C > 0");
  if (cs.ambient_dim() != n) {
    throw ValidationError("cross-section dimension does not match n = " + std::to_string(n));
  }
  const Exponents ex = exponents_for(n);
  ConcentratedReport r;
  r.eps = eps;
  r.C = C;
  const double np1 = n + 1.0;
  const double growth = std::expm1(np1 * C) / (np1 * C);  // (e^{(1+n)C} - 1)/((1+n)C)
  r.exp_integral_closed = cs.measure() * growth * eps;

  const auto ds = summarize(DriftField::concentrated(eps, C), cs, {np1});
  r.exp_integral_quadrature = ds.exp_integral(np1);
  r.quadrature = evaluate(nc, sc, ds, ex, cs, a, CriterionForm::TheoremForm);
  r.theorem_C1 = r.quadrature.theorem_C1;
  r.theorem_C2 = r.quadrature.theorem_C2;
  r.theorem_C3 = r.quadrature.theorem_C3;

  const double e_neg = std::exp(-C);
  const double power = n / np1;
  r.condition_i_literal = r.theorem_C1 / r.theorem_C3 > e_neg;
  r.condition_i = r.theorem_C1 / r.theorem_C2 > e_neg;
  auto cond_ii = [&](double e) {
    return r.theorem_C2 / r.theorem_C3 > std::pow(cs.measure() * growth * e, power);
  };
  r.condition_ii = cond_ii(eps);
  r.eps_star = std::pow(r.theorem_C2 / r.theorem_C3, np1 / n) / (cs.measure() * growth);
  {
    double lo = std::log(r.eps_star) - 50.0, hi = std::log(r.eps_star) + 50.0;
    if (!cond_ii(std::exp(lo)) || cond_ii(std::exp(hi))) throw InternalError("eps bisection bracket failed");
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cond_ii(std::exp(mid)) ? lo : hi) = mid;
    }
    r.eps_star_bisection = std::exp(0.5 * (lo + hi));
  }
  r.remark_sufficient = r.condition_i && r.condition_ii;

  // closed-form theorem inequality (S = 1 for C > 0)
  const double second = r.theorem_C3 * std::pow(r.exp_integral_closed, power);
  const double rhs = e_neg * std::max(r.theorem_C2, second);
  r.closed_form_satisfied = r.theorem_C1 > rhs;

  const bool near_boundary = std::abs(r.theorem_C1 / rhs - 1.0) < 1e-6;
  r.agree = r.closed_form_satisfied == r.quadrature.satisfied || near_boundary;
  if (!r.agree) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "closed-form and quadrature criterion disagree for eps = " << eps << ", C = " << C
        << " (closed-form lhs/rhs = " << r.theorem_C1 / rhs << ", quadrature lhs/rhs = " << r.quadrature.ratio() << ")";
    throw InternalError(msg.str());
  }
  if (r.remark_sufficient && !r.closed_form_satisfied && !near_boundary) {
    throw InternalError("remark conditions hold but the criterion fails for eps = " + std::to_string(eps));
  }
  return r;
}

}  // namespace front_blocker
