#pragma once

#include "front_blocker/grid.hpp"
#include "front_blocker/nonlinearity.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace front_blocker {

/// w0 = 0 for x1 <= 0 and x1 / a on [0, a], a = right end of the grid.
DiscreteField reference_profile(std::shared_ptr<const TruncatedGrid> g);

double energy(const DiscreteField& w, const ExtendedNonlinearity& nl);

struct MinimizerConfig {
  double tol = 1e-8;          ///< on the EL residual (interior) or the projected-gradient norm (on the sphere)
  int max_iterations = 20000;
  double armijo = 1e-4;
  double initial_step = 1.0;  ///< in the metric of the weighted H^1 Gram matrix
};

struct MinimizeResult {
  DiscreteField w;
  double energy = 0.0;
  double energy_w0 = 0.0;
  double ball_radius_used = 0.0;
  double distance_to_w0 = 0.0;
  double el_residual = 0.0;     ///< max over free nodes of |dJ/dw_i| / m_i
  double projected_gradient = 0.0;
  bool constraint_active = false;
  bool converged = false;
  int iterations = 0;
  double min_value = 0.0;
  double max_value = 0.0;
};

/// Projected descent on J over {||w - w0||_{H^1(psi)} <= delta} starting at
/// w0. The descent direction is the gradient in the weighted H^1 metric
/// (Gram matrix factorized once); steps follow Barzilai-Borwein with Armijo
/// backtracking; the projection is radial toward w0 in the same metric.
/// Throws ConvergenceError when the line search cannot decrease J.
MinimizeResult minimize_constrained(std::shared_ptr<const TruncatedGrid> g, const ExtendedNonlinearity& nl,
                                    double delta, const MinimizerConfig& cfg = {});

struct LemmaSample {
  double norm = 0.0;        ///< ||w||_{H^1(psi)}
  double energy_gap = 0.0;  ///< J(w) - J(0)
  double slack = 0.0;       ///< J(w) - J(0) - alpha ||w||^2
  double allowance = 0.0;   ///< discretization slack h_max^2 ||w||^2
};

struct LemmaGapReport {
  std::vector<LemmaSample> samples;
  double min_slack = 0.0;
  int worst_sample = -1;
  bool passed = true;
};

/// J(w) - J(0) - alpha ||w||^2 on a grid over [R, 0] with w(R) = 0.
LemmaSample lemma_gap(const TruncatedGrid& g, std::span<const double> w, const ExtendedNonlinearity& nl,
                      double alpha);

/// Random smooth fields vanishing at x1 = R with norms spread over (0, delta];
/// the last sample sits exactly on the sphere. Throws CertificateError naming
/// the first sample whose slack falls below minus its allowance.
LemmaGapReport lemma_gap_check(std::shared_ptr<const TruncatedGrid> g, const ExtendedNonlinearity& nl, double alpha,
                               double delta, int samples, std::uint64_t seed = 1);

struct StabilizeResult {
  std::vector<double> R_used;
  std::vector<MinimizeResult> runs;
  /// max |w_{R_{i+1}} - w_{R_i}| on the common window [R_i, a]
  std::vector<double> cauchy_gaps;
  bool gaps_decreasing = true;
  std::string warning;

  const MinimizeResult& last() const { return runs.back(); }
};

/// Minimizers for each R on grids anchored at a with common spacing h1 and
/// the same delta. Runs the R values concurrently.
StabilizeResult stabilize_in_R(const DriftField& d, const CrossSection& cs, const ExtendedNonlinearity& nl,
                               double delta, double a, double h1, const std::vector<int>& cross,
                               const std::vector<double>& R_sequence, const MinimizerConfig& cfg = {});

/// w_inf on [R, a] extended by 1 for x1 > a (and by its left boundary value
/// for x1 < R).
class Supersolution {
 public:
  Supersolution(DiscreteField w, double residual, double junction_slope, double min_value, double max_value);

  double at(double x1, std::span<const double> y) const;
  double a() const { return w_.grid->x_hi(); }
  double R() const { return w_.grid->x_lo(); }
  const DiscreteField& field() const noexcept { return w_; }
  double interior_residual() const noexcept { return residual_; }
  double junction_slope() const noexcept { return slope_; }
  double min_value() const noexcept { return min_; }
  double max_value() const noexcept { return max_; }

 private:
  DiscreteField w_;
  double residual_;
  double slope_;
  double min_;
  double max_;
};

/// Certifies (i) interior EL residual <= tol, (ii) axial slope at x1 = a-
/// >= -tol, (iii) 0 <= w <= 1; throws CertificateError with the location of
/// the first failure.
Supersolution extend_and_certify(const DiscreteField& w_inf, const ExtendedNonlinearity& nl, double tol);

}  // namespace front_blocker
