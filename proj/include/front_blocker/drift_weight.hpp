#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace front_blocker {

/// Rectangular cross-section Omega = prod (0, L_i) of the cylinder R x Omega.
class CrossSection {
 public:
  /// `lengths` has n - 1 >= 2 entries, all positive.
  explicit CrossSection(std::vector<double> lengths, double lipschitz_norm = 0.0);

  int dim() const noexcept { return static_cast<int>(lengths_.size()); }
  /// Ambient dimension n.
  int ambient_dim() const noexcept { return dim() + 1; }
  const std::vector<double>& lengths() const noexcept { return lengths_; }
  double measure() const noexcept { return measure_; }
  double lipschitz_norm() const noexcept { return lipschitz_norm_; }

 private:
  std::vector<double> lengths_;
  double measure_;
  double lipschitz_norm_;
};

/// Compactly supported drift k = grad H with supp k in [-x0, 0] x closure(Omega).
///
/// H is stored normalized (H = 0 for x1 <= -x0) together with a separate
/// additive gauge constant. Line integrals of k1 and every summary use the
/// normalized potential only, so they do not depend on the gauge; psi and H
/// include it.
class DriftField {
 public:
  enum class Family { Concentrated, AxialBump, GridPotential };

  /// k = (C/eps) chi_[-eps,0](x1) e1; H ramps linearly from 0 to C on [-eps, 0].
  static DriftField concentrated(double eps, double C);
  /// k = 0 with support width x0.
  static DriftField zero(double x0);
  /// k = (g(x1), 0, ..., 0) with g piecewise linear through (x_i, g_i); the
  /// knots must span exactly [-x0, 0].
  static DriftField axial_bump(std::vector<double> x, std::vector<double> g);
  static DriftField axial_bump_from_csv(const std::filesystem::path& path);
  /// Multilinear potential on a tensor grid over [-x0, 0] x Omega. `axes[0]`
  /// holds the x1 nodes (ending at 0), `axes[i]` the nodes of the i-th
  /// cross-section coordinate; `values` is row-major with x1 slowest. H must
  /// be constant in y on the slices x1 = -x0 and x1 = 0.
  static DriftField grid(std::vector<std::vector<double>> axes, std::vector<double> values);
  /// CSV rows (x1, y_1, ..., y_{n-1}, H) covering a full tensor grid.
  static DriftField grid_from_csv(const std::filesystem::path& path);

  Family family() const noexcept { return family_; }
  double x0() const noexcept { return x0_; }
  double gauge() const noexcept { return gauge_; }
  /// True when H depends on x1 only.
  bool is_axial() const noexcept { return family_ != Family::GridPotential; }
  /// Cross-section dimension the potential was built for (0 if axial).
  int cross_dim() const noexcept;

  /// Parameters of the Concentrated family (NaN otherwise).
  double eps() const noexcept { return eps_; }
  double strength() const noexcept { return C_; }

  /// Copy with H replaced by H + c (only the gauge changes).
  DriftField with_gauge_shift(double c) const;
  /// Copy with the normalized potential multiplied by s.
  DriftField scaled(double s) const;

  /// Normalized potential plus gauge.
  double H(double x1, std::span<const double> y) const;
  double psi(double x1, std::span<const double> y) const;
  /// Axial component of k.
  double k1(double x1, std::span<const double> y) const;
  /// Full drift vector (size 1 + cross dimension of y).
  std::vector<double> k(double x1, std::span<const double> y) const;
  /// sup |k| over the support.
  double max_abs_k() const;

  /// \int_{-x0}^{x1} k1(s, y) ds = H(x1, y) - H(-x0, y); x1 is clamped to [-x0, 0].
  double line_integral_k1(double x1, std::span<const double> y) const;

  /// Axial breakpoints of H inside [-x0, 0], including both ends.
  std::vector<double> axial_breaks() const;
  /// Cross-section breakpoints along axis i (empty for axial families).
  std::vector<double> cross_breaks(int i) const;

 private:
  struct Grid;
  DriftField() = default;
  double Hn(double x1, std::span<const double> y) const;

  Family family_ = Family::Concentrated;
  double x0_ = 0.0;
  double gauge_ = 0.0;
  double scale_ = 1.0;
  double eps_ = 0.0;
  double C_ = 0.0;
  std::vector<double> knots_;
  std::vector<double> g_;
  std::vector<double> H_knots_;
  std::shared_ptr<const Grid> grid_;
};

using WeightFunction = DriftField;

struct DriftSummary {
  double net_drift = 0.0;    ///< \int_{-x0}^0 avg_Omega k1
  double sup_exp_neg = 0.0;  ///< sup over D_{-x0}^0 of exp(-\int_{-x0}^{x1} k1)
  std::vector<std::pair<double, double>> exp_integrals;  ///< (r, \int exp(r \int_{-x0}^{x1} k1))
  double psi_ratio = 0.0;    ///< psi(0) / psi(-x0)
  double x0 = 0.0;
  double measure = 0.0;      ///< |Omega|

  /// Throws std::out_of_range if r was not requested.
  double exp_integral(double r) const;
};

struct SummaryOptions {
  int quad_resolution = 16;  ///< initial midpoint points per axis
  double rel_tol = 1e-8;
  int max_depth = 14;        ///< dyadic refinements before giving up
};

/// \int over D_{-x0}^0 of g(x1, y) by panel midpoint sums refined dyadically
/// with a Romberg table; panels follow the breakpoints of the potential.
double integrate_slab(const DriftField& d, const CrossSection& cs,
                      const std::function<double(double, std::span<const double>)>& g, const SummaryOptions& options,
                      const std::string& what = "slab integral");

DriftSummary summarize(const DriftField& d, const CrossSection& cs, const std::vector<double>& exponents,
                       const SummaryOptions& options = {});

}  // namespace front_blocker
