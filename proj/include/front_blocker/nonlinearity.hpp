#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace front_blocker {

/// Bistable reaction term on [0,1] with stable zeros 0 and 1 and one
/// unstable zero theta in between.
///
/// Two representations are supported: the cubic u(1-u)(u-theta), whose
/// primitive is available in closed form, and a tabulated f sampled on
/// [0,1] and interpolated with monotone (PCHIP) cubics. Objects are
/// immutable once built and validated.
class BistableNonlinearity {
 public:
  enum class Kind { Cubic, Tabulated };

  /// Which assumptions to enforce at construction. `SkipPositiveMass` drops
  /// the requirement that f have positive integral; it exists for tests that
  /// probe the sign of the wave speed on both sides of theta = 1/2.
  enum class Checks { All, SkipPositiveMass };

  /// u(1-u)(u-theta), 0 < theta < 1/2.
  static BistableNonlinearity cubic(double theta, Checks checks = Checks::All);

  /// Samples (u_i, f(u_i)) with u_0 = 0 < ... < u_N = 1.
  static BistableNonlinearity tabulated(std::vector<double> u, std::vector<double> f,
                                        Checks checks = Checks::All);

  /// Two-column CSV (u, f(u)); '#' comment lines and a non-numeric header row
  /// are skipped.
  static BistableNonlinearity from_csv(const std::filesystem::path& path);

  Kind kind() const noexcept { return kind_; }
  double theta() const noexcept { return theta_; }

  /// Values on [0,1]; arguments outside are clamped to the interval.
  double f(double u) const;
  double f_prime(double u) const;
  double f_second(double u) const;

  /// F(s) = \int_s^1 f for s in [0,1].
  double primitive(double s) const;

  /// sup |f''| over [0,1].
  double f_second_sup() const;

  /// Validation tolerance applied to f(0) = f(1) = 0.
  double zero_tolerance() const noexcept;

  /// Tabulated samples (empty for the cubic).
  std::span<const double> sample_u() const noexcept { return table_u_; }
  std::span<const double> sample_f() const noexcept { return table_f_; }

 private:
  struct Table;

  BistableNonlinearity() = default;
  void validate(Checks checks) const;

  Kind kind_ = Kind::Cubic;
  double theta_ = 0.0;
  std::vector<double> table_u_;
  std::vector<double> table_f_;
  std::shared_ptr<const Table> table_;
};

/// The nonlinearity continued linearly outside [0,1]:
///   f(s) = f'(0) s        for s < 0,
///   f(s) = f'(1) (s - 1)  for s > 1,
/// which is C^{1,1} on the real line and makes F grow quadratically.
class ExtendedNonlinearity {
 public:
  explicit ExtendedNonlinearity(BistableNonlinearity base);

  const BistableNonlinearity& base() const noexcept { return base_; }
  double theta() const noexcept { return base_.theta(); }

  double f(double s) const;
  double f_prime(double s) const;
  /// Zero outside [0,1]; one-sided values at the junctions are taken from
  /// the interior.
  double f_second(double s) const;

  /// F(s) = \int_s^1 f on the whole real line.
  double F(double s) const;

  double slope_at_zero() const noexcept { return fp0_; }
  double slope_at_one() const noexcept { return fp1_; }
  double F0() const noexcept { return F0_; }

  /// Exact Taylor remainder F(s) - F(0) - F'(0) s - F''(0) s^2 / 2.
  double taylor_remainder(double s) const;

 private:
  BistableNonlinearity base_;
  double fp0_;
  double fp1_;
  double F0_;
};

double eval_F(const ExtendedNonlinearity& nl, double s);

/// Constants of f that enter the blocking criterion.
struct NonlinearityConstants {
  double alpha = 0.0;   ///< min{1/4, -f'(0)/4}
  double mu = 0.0;      ///< F(0) - (f'(0) + f'(1)) / 2
  double f2_inf = 0.0;  ///< sup |f''| on [0,1]
  double K = 0.0;       ///< largest K with F(s) >= K (s-1)^2 for all s
  double K_argmin = 0.0;
  double F0 = 0.0;      ///< F(0) = \int_0^1 f
  double Fmax = 0.0;    ///< max of F on [0,1]
};

NonlinearityConstants compute_constants(const ExtendedNonlinearity& nl);

/// Coefficient gamma~ such that |eta(s) s^2| <= gamma s^2 + gamma~ |s|^q.
double gamma_tilde(const NonlinearityConstants& constants, double gamma, double exponent_q);

/// Envelope of the Taylor remainder:
///   f2_inf s^3 on (0,1), mu s^2 on [1,inf), 0 for s <= 0.
double eta_remainder_bound(const NonlinearityConstants& constants, double s);

}  // namespace front_blocker
