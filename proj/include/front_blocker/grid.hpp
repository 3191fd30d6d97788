#pragma once

#include "front_blocker/drift_weight.hpp"
#include "front_blocker/nonlinearity.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace front_blocker {

/// Node counts of a tensor grid: axial first, then one entry per
/// cross-section axis.
struct GridResolution {
  int axial = 64;
  std::vector<int> cross{8, 8};
};

/// Tensor grid on [x_lo, x_hi] x closure(Omega) carrying the weight psi.
///
/// Axial nodes are anchored at the right end, x_i = x_hi - (N - 1 - i) h, so
/// grids sharing x_hi and h have bit-identical common nodes. Lateral nodes
/// include both faces; Neumann conditions come from half dual cells there,
/// which is ghost-node reflection written in energy form.
///
/// Discrete energy and norm:
///   sum_edges kappa_e (v_j - v_i)^2 + sum_nodes m_i v_i^2
/// where kappa_e = (dual face area) / \int_edge psi^{-1} (harmonic mean of
/// psi along the edge) and m_i = \int over the dual cell of psi.
class TruncatedGrid {
 public:
  TruncatedGrid(const DriftField& d, const CrossSection& cs, double x_lo, double x_hi, const GridResolution& res);
  /// Grid on [a - (N - 1) h, a] with the smallest N reaching R; requires
  /// R < -x0 - 1 and a > 0.
  static TruncatedGrid anchored(const DriftField& d, const CrossSection& cs, double R, double a, double h1,
                                std::vector<int> cross);
  /// D_R^a with N axial nodes; requires R < -x0 - 1 and a > 0.
  static TruncatedGrid cylinder(const DriftField& d, const CrossSection& cs, double R, double a,
                                const GridResolution& res);

  int dims() const noexcept { return static_cast<int>(size_.size()); }
  int size(int axis) const { return size_[axis]; }
  std::size_t node_count() const noexcept { return count_; }
  std::size_t stride(int axis) const { return stride_[axis]; }
  double x_lo() const noexcept { return x_lo_; }
  double x_hi() const noexcept { return x_hi_; }
  double spacing(int axis) const { return h_[axis]; }
  double min_spacing() const;
  const CrossSection& cross_section() const noexcept { return cs_; }
  const DriftField& drift() const noexcept { return drift_; }

  /// Coordinate of node index i along an axis.
  double coord(int axis, int i) const;
  /// Multi-index of a flat node index.
  int index(std::size_t node, int axis) const { return static_cast<int>((node / stride_[axis]) % size_[axis]); }
  double x1(std::size_t node) const { return coord(0, index(node, 0)); }
  /// Cross-section coordinates of a node.
  std::vector<double> y(std::size_t node) const;
  /// Flat index of the node at axial index i nearest the cross-section center.
  std::size_t centerline(int i) const;

  std::span<const double> mass() const noexcept { return mass_; }
  std::span<const double> psi() const noexcept { return psi_; }
  /// Edge coefficients along `axis`, indexed by the lower node (0 past the last node).
  std::span<const double> kappa(int axis) const { return kappa_[axis]; }
  /// Drift vectors at the nodes, node-major with dims() components each.
  std::span<const double> drift_at_nodes() const noexcept { return k_; }

  /// Total volume and \int psi over the slab.
  double volume() const;
  double weighted_volume() const;

 private:
  DriftField drift_;
  CrossSection cs_;
  double x_lo_ = 0.0;
  double x_hi_ = 0.0;
  std::vector<int> size_;
  std::vector<std::size_t> stride_;
  std::vector<double> h_;
  std::size_t count_ = 0;
  std::vector<double> mass_;
  std::vector<double> psi_;
  std::vector<std::vector<double>> kappa_;
  std::vector<double> k_;
};

/// Which axial ends carry Dirichlet data.
struct BoundaryTags {
  bool dirichlet_left = true;   ///< value at x1 = x_lo
  bool dirichlet_right = true;  ///< value at x1 = x_hi
  double left_value = 0.0;
  double right_value = 1.0;
};

/// Nodal values on a TruncatedGrid.
struct DiscreteField {
  std::shared_ptr<const TruncatedGrid> grid;
  std::vector<double> values;
  BoundaryTags tags;

  DiscreteField() = default;
  DiscreteField(std::shared_ptr<const TruncatedGrid> g, BoundaryTags t);
  DiscreteField(std::shared_ptr<const TruncatedGrid> g, std::vector<double> v, BoundaryTags t);

  /// True if the node is fixed by a Dirichlet tag.
  bool is_fixed(std::size_t node) const;
  /// Writes the tagged boundary values; returns *this.
  DiscreteField& apply_tags();
  /// Multilinear interpolation; x1 is clamped to the grid.
  double at(double x1, std::span<const double> y) const;
};

/// J = sum_edges kappa/2 (dv)^2 + sum_nodes m F(v).
double energy(const TruncatedGrid& g, std::span<const double> w, const ExtendedNonlinearity& nl);
/// J(w_new) - J(w_old) summed term by term so that it stays accurate when the
/// two fields are close: differences of squares for the gradient part and
/// Simpson's rule on F(b) - F(a) = -\int_a^b f (exact for piecewise cubic f).
double energy_difference(const TruncatedGrid& g, std::span<const double> w_old, std::span<const double> w_new,
                         const ExtendedNonlinearity& nl);
/// dJ/dw at every node (including fixed ones).
std::vector<double> energy_gradient(const TruncatedGrid& g, std::span<const double> w, const ExtendedNonlinearity& nl);
/// Discrete weighted H^1 norm squared.
double weighted_norm_sq(const TruncatedGrid& g, std::span<const double> v);
/// Gradient part sum kappa (dv)^2 and value part sum m v^2 of the norm.
std::pair<double, double> weighted_norm_parts(const TruncatedGrid& g, std::span<const double> v);
/// Strong-form residual (dJ/dw_i) / m_i = -(1/psi) div(psi grad w) - f(w) at every node.
std::vector<double> el_residual_field(const TruncatedGrid& g, std::span<const double> w,
                                      const ExtendedNonlinearity& nl);

/// Free nodes (not fixed by the tags) and the inverse map (-1 for fixed nodes).
struct FreeIndex {
  std::vector<std::size_t> nodes;
  std::vector<long> slot;
};
FreeIndex free_index(const DiscreteField& f);

/// Gram matrix of the weighted H^1 inner product restricted to free nodes.
Eigen::SparseMatrix<double> weighted_gram(const TruncatedGrid& g, const FreeIndex& fi);

}  // namespace front_blocker
