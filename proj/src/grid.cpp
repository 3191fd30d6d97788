#include "front_blocker/grid.hpp"

#include "front_blocker/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace front_blocker {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 10>;

// \int_lo^hi g split at the given breakpoints; each piece is smooth.
template <class G>
double piecewise_gauss(const G& g, double lo, double hi, const std::vector<double>& breaks) {
  if (hi <= lo) return 0.0;
  double total = 0.0;
  double a = lo;
  for (double b : breaks) {
    if (b <= a || b >= hi) continue;
    total += Gauss::integrate(g, a, b);
    a = b;
  }
  return total + Gauss::integrate(g, a, hi);
}

double dual_length(const std::vector<double>& h, const std::vector<int>& size, int axis, int i) {
  return (i == 0 || i == size[axis] - 1) ? 0.5 * h[axis] : h[axis];
}

}  // namespace

TruncatedGrid::TruncatedGrid(const DriftField& d, const CrossSection& cs, double x_lo, double x_hi,
                             const GridResolution& res)
    : drift_(d), cs_(cs), x_lo_(x_lo), x_hi_(x_hi) {
  if (!(x_lo < x_hi)) throw ValidationError("grid requires x_lo < x_hi");
  if (static_cast<int>(res.cross.size()) != cs.dim()) {
    throw ValidationError("grid resolution has " + std::to_string(res.cross.size()) +
                          " cross-section axes, cross-section has " + std::to_string(cs.dim()));
  }
  if (res.axial < 3) throw ValidationError("grid needs at least 3 axial nodes");
  for (int c : res.cross) {
    if (c < 2) throw ValidationError("grid needs at least 2 nodes per cross-section axis");
  }
  size_.push_back(res.axial);
  size_.insert(size_.end(), res.cross.begin(), res.cross.end());
  const int nd = dims();
  stride_.assign(nd, 1);
  for (int a = nd - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * static_cast<std::size_t>(size_[a + 1]);
  count_ = stride_[0] * static_cast<std::size_t>(size_[0]);
  h_.resize(nd);
  h_[0] = (x_hi - x_lo) / (size_[0] - 1);
  for (int a = 1; a < nd; ++a) h_[a] = cs.lengths()[a - 1] / (size_[a] - 1);

  const auto axial_breaks = d.axial_breaks();
  std::vector<std::vector<double>> cross_breaks(nd);
  for (int a = 1; a < nd; ++a) cross_breaks[a] = d.cross_breaks(a - 1);

  mass_.resize(count_);
  psi_.resize(count_);
  kappa_.assign(nd, std::vector<double>(count_, 0.0));
  k_.resize(count_ * nd);

  std::vector<double> y(nd - 1);
  for (std::size_t node = 0; node < count_; ++node) {
    const int i0 = index(node, 0);
    const double x = coord(0, i0);
    for (int a = 1; a < nd; ++a) y[a - 1] = coord(a, index(node, a));
    const std::span<const double> ys(y);

    double lateral_dual = 1.0;
    for (int a = 1; a < nd; ++a) lateral_dual *= dual_length(h_, size_, a, index(node, a));

    const auto psi_x = [&](double s) { return d.psi(s, ys); };
    const auto inv_psi_x = [&](double s) { return std::exp(d.H(s, ys)); };
    const double lo = i0 == 0 ? x : x - 0.5 * h_[0];
    const double hi = i0 == size_[0] - 1 ? x : x + 0.5 * h_[0];
    const double axial_psi = piecewise_gauss(psi_x, lo, hi, axial_breaks);

    psi_[node] = d.psi(x, ys);
    mass_[node] = lateral_dual * axial_psi;

    if (i0 + 1 < size_[0]) {
      kappa_[0][node] = lateral_dual / piecewise_gauss(inv_psi_x, x, coord(0, i0 + 1), axial_breaks);
    }
    for (int a = 1; a < nd; ++a) {
      const int ia = index(node, a);
      if (ia + 1 >= size_[a]) continue;
      double other = 1.0;
      for (int b = 1; b < nd; ++b) {
        if (b != a) other *= dual_length(h_, size_, b, index(node, b));
      }
      std::vector<double> yy = y;
      const auto inv_psi_y = [&](double s) {
        yy[a - 1] = s;
        return std::exp(d.H(x, yy));
      };
      const double resistance = piecewise_gauss(inv_psi_y, y[a - 1], coord(a, ia + 1), cross_breaks[a]);
      // axial dual length with the axial variation of psi folded in
      kappa_[a][node] = other * (axial_psi / psi_[node]) / resistance;
    }

    const auto kv = d.k(x, ys);
    for (int a = 0; a < nd; ++a) k_[node * nd + a] = kv[a];
  }
}

TruncatedGrid TruncatedGrid::anchored(const DriftField& d, const CrossSection& cs, double R, double a, double h1,
                                      std::vector<int> cross) {
  if (!(h1 > 0.0)) throw ValidationError("axial spacing must be positive");
  if (!(R < -d.x0() - 1.0)) throw ValidationError("truncation R must satisfy R < -x0 - 1");
  if (!(a > 0.0)) throw ValidationError("right end a must be positive");
  const int n = static_cast<int>(std::ceil((a - R) / h1 - 1e-9)) + 1;
  const double lo = a - (n - 1) * h1;
  return TruncatedGrid(d, cs, lo, a, GridResolution{n, std::move(cross)});
}

TruncatedGrid TruncatedGrid::cylinder(const DriftField& d, const CrossSection& cs, double R, double a,
                                      const GridResolution& res) {
  if (!(R < -d.x0() - 1.0)) throw ValidationError("truncation R must satisfy R < -x0 - 1");
  if (!(a > 0.0)) throw ValidationError("right end a must be positive");
  return TruncatedGrid(d, cs, R, a, res);
}

double TruncatedGrid::coord(int axis, int i) const {
  if (axis == 0) return x_hi_ - (size_[0] - 1 - i) * h_[0];
  return i * h_[axis];
}

double TruncatedGrid::min_spacing() const {
  return *std::min_element(h_.begin(), h_.end());
}

std::vector<double> TruncatedGrid::y(std::size_t node) const {
  std::vector<double> out(dims() - 1);
  for (int a = 1; a < dims(); ++a) out[a - 1] = coord(a, index(node, a));
  return out;
}

std::size_t TruncatedGrid::centerline(int i) const {
  std::size_t node = static_cast<std::size_t>(i) * stride_[0];
  for (int a = 1; a < dims(); ++a) node += static_cast<std::size_t>((size_[a] - 1) / 2) * stride_[a];
  return node;
}

double TruncatedGrid::volume() const {
  return (x_hi_ - x_lo_) * cs_.measure();
}

double TruncatedGrid::weighted_volume() const {
  return std::accumulate(mass_.begin(), mass_.end(), 0.0);
}

DiscreteField::DiscreteField(std::shared_ptr<const TruncatedGrid> g, BoundaryTags t)
    : grid(std::move(g)), values(grid->node_count(), 0.0), tags(t) {
  apply_tags();
}

DiscreteField::DiscreteField(std::shared_ptr<const TruncatedGrid> g, std::vector<double> v, BoundaryTags t)
    : grid(std::move(g)), values(std::move(v)), tags(t) {
  if (values.size() != grid->node_count()) throw ValidationError("field size does not match the grid");
}

bool DiscreteField::is_fixed(std::size_t node) const {
  const int i = grid->index(node, 0);
  return (tags.dirichlet_left && i == 0) || (tags.dirichlet_right && i == grid->size(0) - 1);
}

DiscreteField& DiscreteField::apply_tags() {
  const std::size_t layer = grid->stride(0);
  const std::size_t last = grid->node_count() - layer;
  for (std::size_t j = 0; j < layer; ++j) {
    if (tags.dirichlet_left) values[j] = tags.left_value;
    if (tags.dirichlet_right) values[last + j] = tags.right_value;
  }
  return *this;
}

double DiscreteField::at(double x1, std::span<const double> y) const {
  const auto& g = *grid;
  const int nd = g.dims();
  std::array<int, 8> lo{};
  std::array<double, 8> t{};
  for (int a = 0; a < nd; ++a) {
    const double origin = a == 0 ? g.x_lo() : 0.0;
    const double s = a == 0 ? x1 : y[a - 1];
    double u = (s - origin) / g.spacing(a);
    u = std::clamp(u, 0.0, static_cast<double>(g.size(a) - 1));
    int i = std::min(static_cast<int>(std::floor(u)), g.size(a) - 2);
    lo[a] = i;
    t[a] = u - i;
  }
  double total = 0.0;
  for (int corner = 0; corner < (1 << nd); ++corner) {
    double w = 1.0;
    std::size_t node = 0;
    for (int a = 0; a < nd; ++a) {
      const int bit = (corner >> a) & 1;
      w *= bit ? t[a] : 1.0 - t[a];
      node += static_cast<std::size_t>(lo[a] + bit) * g.stride(a);
    }
    if (w != 0.0) total += w * values[node];
  }
  return total;
}

double energy(const TruncatedGrid& g, std::span<const double> w, const ExtendedNonlinearity& nl) {
  const std::size_t n = g.node_count();
  const auto m = g.mass();
  double grad = 0.0;
  double pot = 0.0;
  for (int a = 0; a < g.dims(); ++a) {
    const auto kap = g.kappa(a);
    const std::size_t s = g.stride(a);
    for (std::size_t i = 0; i < n; ++i) {
      if (kap[i] == 0.0) continue;
      const double dv = w[i + s] - w[i];
      grad += kap[i] * dv * dv;
    }
  }
  for (std::size_t i = 0; i < n; ++i) pot += m[i] * nl.F(w[i]);
  return 0.5 * grad + pot;
}

double energy_difference(const TruncatedGrid& g, std::span<const double> w_old, std::span<const double> w_new,
                         const ExtendedNonlinearity& nl) {
  const std::size_t n = g.node_count();
  const auto m = g.mass();
  double grad = 0.0;
  double pot = 0.0;
  for (int a = 0; a < g.dims(); ++a) {
    const auto kap = g.kappa(a);
    const std::size_t s = g.stride(a);
    for (std::size_t i = 0; i < n; ++i) {
      if (kap[i] == 0.0) continue;
      const double d_old = w_old[i + s] - w_old[i];
      const double d_new = w_new[i + s] - w_new[i];
      grad += kap[i] * (d_new - d_old) * (d_new + d_old);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double a = w_old[i];
    const double b = w_new[i];
    if (a == b) continue;
    pot -= m[i] * (b - a) * (nl.f(a) + 4.0 * nl.f(0.5 * (a + b)) + nl.f(b)) / 6.0;
  }
  return 0.5 * grad + pot;
}

std::vector<double> energy_gradient(const TruncatedGrid& g, std::span<const double> w,
                                    const ExtendedNonlinearity& nl) {
  const std::size_t n = g.node_count();
  const auto m = g.mass();
  std::vector<double> out(n);
  // F' = -f
  for (std::size_t i = 0; i < n; ++i) out[i] = -m[i] * nl.f(w[i]);
  for (int a = 0; a < g.dims(); ++a) {
    const auto kap = g.kappa(a);
    const std::size_t s = g.stride(a);
    for (std::size_t i = 0; i < n; ++i) {
      if (kap[i] == 0.0) continue;
      const double flux = kap[i] * (w[i + s] - w[i]);
      out[i] -= flux;
      out[i + s] += flux;
    }
  }
  return out;
}

std::pair<double, double> weighted_norm_parts(const TruncatedGrid& g, std::span<const double> v) {
  const std::size_t n = g.node_count();
  const auto m = g.mass();
  double grad = 0.0;
  double val = 0.0;
  for (int a = 0; a < g.dims(); ++a) {
    const auto kap = g.kappa(a);
    const std::size_t s = g.stride(a);
    for (std::size_t i = 0; i < n; ++i) {
      if (kap[i] == 0.0) continue;
      const double dv = v[i + s] - v[i];
      grad += kap[i] * dv * dv;
    }
  }
  for (std::size_t i = 0; i < n; ++i) val += m[i] * v[i] * v[i];
  return {grad, val};
}

double weighted_norm_sq(const TruncatedGrid& g, std::span<const double> v) {
  const auto [a, b] = weighted_norm_parts(g, v);
  return a + b;
}

std::vector<double> el_residual_field(const TruncatedGrid& g, std::span<const double> w,
                                      const ExtendedNonlinearity& nl) {
  auto r = energy_gradient(g, w, nl);
  const auto m = g.mass();
  for (std::size_t i = 0; i < r.size(); ++i) r[i] /= m[i];
  return r;
}

FreeIndex free_index(const DiscreteField& f) {
  FreeIndex fi;
  const std::size_t n = f.grid->node_count();
  fi.slot.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (f.is_fixed(i)) continue;
    fi.slot[i] = static_cast<long>(fi.nodes.size());
    fi.nodes.push_back(i);
  }
  return fi;
}

Eigen::SparseMatrix<double> weighted_gram(const TruncatedGrid& g, const FreeIndex& fi) {
  const std::size_t n = g.node_count();
  const auto m = g.mass();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(fi.nodes.size() * (2 * g.dims() + 1));
  for (std::size_t i = 0; i < n; ++i) {
    if (fi.slot[i] >= 0) trip.emplace_back(fi.slot[i], fi.slot[i], m[i]);
  }
  for (int a = 0; a < g.dims(); ++a) {
    const auto kap = g.kappa(a);
    const std::size_t s = g.stride(a);
    for (std::size_t i = 0; i < n; ++i) {
      if (kap[i] == 0.0) continue;
      const long p = fi.slot[i];
      const long q = fi.slot[i + s];
      if (p >= 0) trip.emplace_back(p, p, kap[i]);
      if (q >= 0) trip.emplace_back(q, q, kap[i]);
      if (p >= 0 && q >= 0) {
        trip.emplace_back(p, q, -kap[i]);
        trip.emplace_back(q, p, -kap[i]);
      }
    }
  }
  const auto nf = static_cast<Eigen::Index>(fi.nodes.size());
  Eigen::SparseMatrix<double> M(nf, nf);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

}  // namespace front_blocker
