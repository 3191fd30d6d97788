#pragma once

#include "front_blocker/nonlinearity.hpp"

#include <memory>
#include <vector>

namespace front_blocker {

struct WaveSolveOptions {
  double tol = 1e-10;          ///< bracket width on c at termination
  int max_iterations = 200;
  int phase_steps = 4000;      ///< RK4 steps per phase-plane branch
  double z_step = 0.005;
  double tail_level = 1e-10;   ///< grid extends until phi < tail_level and 1 - phi < tail_level
};

/// Planar traveling wave phi(z), z = x1 + c t, solving
/// phi'' - c phi' + f(phi) = 0 with phi(-inf) = 0, phi(+inf) = 1,
/// normalized so that phi(0) = theta.
class WaveProfile {
 public:
  double speed() const noexcept { return c_; }
  double theta() const noexcept { return theta_; }
  const std::vector<double>& z() const noexcept { return z_; }
  const std::vector<double>& phi() const noexcept { return phi_; }
  const std::vector<double>& dphi() const noexcept { return dphi_; }
  double dz() const noexcept { return dz_; }

  /// Exponential decay rate of phi as z -> -inf and of 1 - phi as z -> +inf.
  double left_rate() const noexcept { return lambda_; }
  double right_rate() const noexcept { return kappa_; }

  /// Interface thickness 1 / max phi'.
  double width() const;

  /// |connection mismatch| at termination of the shooting.
  double shooting_residual() const noexcept { return shooting_residual_; }
  int iterations() const noexcept { return iterations_; }

  /// L-infinity norm of the second-difference ODE residual on the grid.
  double ode_residual(const ExtendedNonlinearity& nl) const;

  /// Profile translated by `shift`: returns psi with psi(z) = phi(z - shift).
  WaveProfile shifted(double shift) const;

  double at(double z) const;

 private:
  friend WaveProfile solve_wave(const ExtendedNonlinearity&, const WaveSolveOptions&);
  void build_interpolant();

  double c_ = 0.0;
  double theta_ = 0.0;
  double lambda_ = 0.0;
  double kappa_ = 0.0;
  double dz_ = 0.0;
  double shooting_residual_ = 0.0;
  int iterations_ = 0;
  std::vector<double> z_;
  std::vector<double> phi_;
  std::vector<double> dphi_;
  struct Interp;
  std::shared_ptr<const Interp> interp_;
};

/// Phase-plane shooting: p(phi) = phi' solves p dp/dphi = c p - f(phi) with
/// p(0) = p(1) = 0; the branches leaving the saddles at 0 and 1 are matched at
/// phi = theta and c is found by bisection.
WaveProfile solve_wave(const ExtendedNonlinearity& nl, const WaveSolveOptions& options = {});
WaveProfile solve_wave(const ExtendedNonlinearity& nl, double tol);

double wave_at(const WaveProfile& w, double z);

}  // namespace front_blocker
