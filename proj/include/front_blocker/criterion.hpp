#pragma once

#include "front_blocker/drift_weight.hpp"
#include "front_blocker/nonlinearity.hpp"

#include <boost/rational.hpp>

#include <string>
#include <utility>

namespace front_blocker {

using Rational = boost::rational<long long>;

struct SobolevConstants {
  enum class Provenance { Configured, Estimated };
  double C1 = 1.0;  ///< H^1 -> L^q on the cylinder
  double C2 = 1.0;  ///< W^{1,p} -> L^m on the drift slab
  Provenance provenance = Provenance::Configured;
};

/// Sobolev exponents for ambient dimension n, held exactly.
struct Exponents {
  int n = 0;
  Rational q;  ///< 2n/(n-2)
  Rational p;  ///< 2(n+1)/(n+2)
  Rational m;  ///< 2n/(n-1)
  Rational j;  ///< 2(n+1)

  static double d(const Rational& r) { return boost::rational_cast<double>(r); }
};

/// Throws ValidationError for n < 3.
Exponents exponents_for(int n);

enum class CriterionForm { TheoremForm, PropositionForm };

std::string to_string(CriterionForm form);
std::string to_string(SobolevConstants::Provenance p);

struct CriterionReport {
  CriterionForm form = CriterionForm::PropositionForm;
  Exponents exponents;

  // inputs echoed
  double C1 = 0.0;
  double C2 = 0.0;
  SobolevConstants::Provenance provenance = SobolevConstants::Provenance::Configured;
  double net_drift = 0.0;
  double sup_exp_neg = 0.0;
  double exp_integral = 0.0;  ///< \int exp((j/2) \int k1), j/2 = n + 1
  double measure = 0.0;
  double alpha = 0.0;
  double K = 0.0;
  double Fmax = 0.0;

  // Taylor-remainder split
  double gamma_taylor = 0.0;    ///< gamma = alpha/4
  double gamma_tilde_q = 0.0;   ///< gamma~(alpha/4, q)
  double gamma_tilde_m = 0.0;   ///< gamma~(alpha/4, m)
  double branch_q = 0.0;        ///< gamma~(alpha/4, q) C1^q
  double branch_m = 0.0;        ///< gamma~(alpha/4, m) C2^m 2^{(2-p)m/(2p)} S E^{m/j}
  double b_interp = 0.0;        ///< (alpha/4) / branch_m

  // radius of the admissible ball
  double delta = 0.0;             ///< (alpha/2)^{1/(q-2)} max{branch_q, branch_m^{(q-2)/(m-2)}}^{-1/(q-2)}
  double delta_definition = 0.0;  ///< same with 2^{(2-q)m/(2p)} and gamma~(alpha/2, m)
  double delta_strict = 0.0;      ///< (alpha/4)^{1/(q-2)} and the b^{(m-q)/(m-2)} factor kept

  // energy balance on the ramp region
  double a_used = 0.0;
  double nu = 0.0;           ///< min{K, 1/2}
  double beta = 0.0;         ///< (1/(2a) + a Fmax) |Omega|
  double gamma_const = 0.0;  ///< (1/a + a/3) |Omega|
  double eta_const = 0.0;    ///< min{nu/2, alpha}
  /// eta delta^2 - (nu gamma + beta) psi(0) with psi(-x0) = 1 and the primary delta
  double margin_primary_delta = 0.0;

  // Theorem form constants (filled for both forms)
  double theorem_C1 = 0.0;
  double theorem_C2 = 0.0;
  double theorem_C3 = 0.0;

  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;

  double ratio() const { return lhs / rhs; }
};

CriterionReport evaluate(const NonlinearityConstants& nc, const SobolevConstants& sc, const DriftSummary& ds,
                         const Exponents& ex, const CrossSection& cs, double a, CriterionForm form);

double compute_delta(const NonlinearityConstants& nc, const SobolevConstants& sc, const DriftSummary& ds,
                     const Exponents& ex);

/// a minimizing nu gamma + beta, the only a-dependent part: sqrt((nu + 1/2)/(nu/3 + Fmax)).
double optimal_a_closed_form(const NonlinearityConstants& nc);

/// Maximizes lhs/rhs of the proposition form over a in [a_lo, a_hi].
std::pair<double, CriterionReport> optimize_a(const NonlinearityConstants& nc, const SobolevConstants& sc,
                                              const DriftSummary& ds, const Exponents& ex, const CrossSection& cs,
                                              std::pair<double, double> a_range,
                                              CriterionForm form = CriterionForm::PropositionForm);

/// Verdict reproduced without the gauge normalization: psi(-x0) = P is kept
/// and the weight norms are integrated from psi itself.
struct HomogeneityAudit {
  double psi_minus_x0 = 0.0;
  double psi_zero = 0.0;
  double psi_sup = 0.0;       ///< ||psi||_{L^inf(D_{-x0}^0)}
  double psi_inv_norm = 0.0;  ///< ||psi^{-1/2}||_{L^j(D_{-x0}^0)}
  double delta = 0.0;         ///< proposition-form radius with the psi factors carried
  double lhs = 0.0;           ///< eta delta^2
  double rhs = 0.0;           ///< (nu gamma + beta) psi(0)
  bool satisfied = false;
};

HomogeneityAudit homogeneity_audit(const NonlinearityConstants& nc, const SobolevConstants& sc, const DriftField& d,
                                   const Exponents& ex, const CrossSection& cs, double a,
                                   const SummaryOptions& options = {});

/// The two closed-form conditions for k = (C/eps) chi_[-eps,0] e1.
struct ConcentratedReport {
  double eps = 0.0;
  double C = 0.0;
  double exp_integral_closed = 0.0;  ///< |Omega| eps (e^{(1+n)C} - 1) / ((1+n) C)
  double exp_integral_quadrature = 0.0;
  double theorem_C1 = 0.0;
  double theorem_C2 = 0.0;
  double theorem_C3 = 0.0;
  /// Condition on C as printed: C1/C3 > e^{-C}.
  bool condition_i_literal = false;
  /// Condition on C in the form the criterion needs once the second branch
  /// is dominated: C1/C2 > e^{-C}.
  bool condition_i = false;
  /// Condition on eps: C2/C3 > E^{n/(n+1)}, equivalently eps < eps_star.
  bool condition_ii = false;
  double eps_star = 0.0;            ///< closed-form inversion of condition_ii
  double eps_star_bisection = 0.0;  ///< bisection in log eps on condition_ii
  /// condition_i && condition_ii; sufficient for the criterion, not necessary.
  bool remark_sufficient = false;
  /// Full theorem-form inequality with the closed-form exp integral.
  bool closed_form_satisfied = false;
  CriterionReport quadrature;       ///< evaluate() on the summarized drift
  bool agree = false;
};

/// Throws InternalError if the closed form and evaluate() disagree away from
/// the boundary lhs = rhs, or if remark_sufficient holds without the criterion.
ConcentratedReport concentrated_thresholds(int n, const NonlinearityConstants& nc, const SobolevConstants& sc,
                                           const CrossSection& cs, double eps, double C, double a);

}  // namespace front_blocker
