#include "front_blocker/drift_weight.hpp"

#include "front_blocker/error.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace front_blocker {

CrossSection::CrossSection(std::vector<double> lengths, double lipschitz_norm)
    : lengths_(std::move(lengths)), measure_(1.0), lipschitz_norm_(lipschitz_norm) {
  if (lengths_.size() < 2) {
    throw ValidationError("cross-section needs at least 2 dimensions (ambient n >= 3), got " +
                          std::to_string(lengths_.size()));
  }
  for (double L : lengths_) {
    if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("cross-section side lengths must be positive");
    measure_ *= L;
  }
  if (!(lipschitz_norm_ >= 0.0)) throw ValidationError("cross-section lipschitz_norm must be nonnegative");
}

namespace {
constexpr std::size_t kMaxDims = 8;
}

struct DriftField::Grid {
  std::vector<std::vector<double>> axes;
  std::vector<double> values;  // normalized: zero on the x1 = -x0 slice
  std::vector<std::size_t> strides;

  std::size_t dims() const { return axes.size(); }

  // Cell index and local coordinate in [0,1] per axis; `inside` is false when
  // the coordinate was clamped.
  void locate(std::size_t axis, double x, std::size_t& j, double& t, bool& inside) const {
    const auto& a = axes[axis];
    inside = x >= a.front() && x <= a.back();
    x = std::clamp(x, a.front(), a.back());
    auto it = std::upper_bound(a.begin(), a.end(), x);
    j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, std::min<std::ptrdiff_t>(it - a.begin() - 1, a.size() - 2)));
    t = (x - a[j]) / (a[j + 1] - a[j]);
  }

  // Value (deriv_axis < 0) or partial derivative along deriv_axis.
  double eval(std::span<const double> x, int deriv_axis) const {
    const std::size_t d = dims();
    std::array<std::size_t, kMaxDims> j{};
    std::array<double, kMaxDims> t{};
    for (std::size_t i = 0; i < d; ++i) {
      bool inside = true;
      locate(i, x[i], j[i], t[i], inside);
      if (static_cast<int>(i) == deriv_axis && !inside) return 0.0;
    }
    double sum = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
      double w = 1.0;
      std::size_t idx = 0;
      for (std::size_t i = 0; i < d; ++i) {
        const bool up = (corner >> i) & 1U;
        if (static_cast<int>(i) == deriv_axis) {
          w *= (up ? 1.0 : -1.0) / (axes[i][j[i] + 1] - axes[i][j[i]]);
        } else {
          w *= up ? t[i] : 1.0 - t[i];
        }
        idx += (j[i] + (up ? 1 : 0)) * strides[i];
      }
      sum += w * values[idx];
    }
    return sum;
  }
};

DriftField DriftField::concentrated(double eps, double C) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("concentrated drift: eps must be positive");
  if (!std::isfinite(C)) throw ValidationError("concentrated drift: C must be finite");
  DriftField d;
  d.family_ = Family::Concentrated;
  d.x0_ = eps;
  d.eps_ = eps;
  d.C_ = C;
  return d;
}

DriftField DriftField::zero(double x0) { return concentrated(x0, 0.0); }

DriftField DriftField::axial_bump(std::vector<double> x, std::vector<double> g) {
  if (x.size() != g.size() || x.size() < 2) throw ValidationError("axial bump: need >= 2 (x, g) pairs");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw ValidationError("axial bump: x knots must increase strictly");
  }
  if (!(x.front() < 0.0) || std::abs(x.back()) > 1e-12) {
    throw ValidationError("axial bump: knots must span [-x0, 0] with x0 > 0");
  }
  for (double v : g) {
    if (!std::isfinite(v)) throw ValidationError("axial bump: g values must be finite");
  }
  x.back() = 0.0;
  DriftField d;
  d.family_ = Family::AxialBump;
  d.x0_ = -x.front();
  d.eps_ = std::numeric_limits<double>::quiet_NaN();
  d.C_ = std::numeric_limits<double>::quiet_NaN();
  d.H_knots_.assign(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) d.H_knots_[i] = d.H_knots_[i - 1] + 0.5 * (g[i] + g[i - 1]) * (x[i] - x[i - 1]);
  d.knots_ = std::move(x);
  d.g_ = std::move(g);
  return d;
}

namespace {

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path, std::size_t min_cols) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  std::size_t cols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (row.empty() && rows.empty()) continue;  // header
    if (!ss.eof() || row.size() < min_cols || (cols != 0 && row.size() != cols)) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    cols = row.size();
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path.string() + ": no data rows");
  return rows;
}

}  // namespace

DriftField DriftField::axial_bump_from_csv(const std::filesystem::path& path) {
  const auto rows = read_numeric_csv(path, 2);
  if (rows.front().size() != 2) throw ValidationError(path.string() + ": expected two columns (x1, g)");
  std::vector<double> x, g;
  for (const auto& r : rows) {
    x.push_back(r[0]);
    g.push_back(r[1]);
  }
  return axial_bump(std::move(x), std::move(g));
}

DriftField DriftField::grid(std::vector<std::vector<double>> axes, std::vector<double> values) {
  if (axes.size() < 3) throw ValidationError("grid potential: need x1 and at least 2 cross-section axes");
  if (axes.size() > kMaxDims) throw ValidationError("grid potential: at most 8 axes are supported");
  std::size_t total = 1;
  for (const auto& a : axes) {
    if (a.size() < 2) throw ValidationError("grid potential: every axis needs >= 2 nodes");
    for (std::size_t i = 1; i < a.size(); ++i) {
      if (!(a[i] > a[i - 1])) throw ValidationError("grid potential: axis nodes must increase strictly");
    }
    total *= a.size();
  }
  if (values.size() != total) throw ValidationError("grid potential: value count does not match the grid");
  if (!(axes[0].front() < 0.0) || std::abs(axes[0].back()) > 1e-12) {
    throw ValidationError("grid potential: x1 nodes must span [-x0, 0] with x0 > 0");
  }
  axes[0].back() = 0.0;
  auto g = std::make_shared<Grid>();
  g->strides.assign(axes.size(), 1);
  for (std::size_t i = axes.size() - 1; i-- > 0;) g->strides[i] = g->strides[i + 1] * axes[i + 1].size();
  const std::size_t slice = g->strides[0];
  const std::size_t last = (axes[0].size() - 1) * slice;
  const double left = values[0];
  const double right = values[last];
  double scale = 1.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("grid potential: values must be finite");
    scale = std::max(scale, std::abs(v));
  }
  for (std::size_t s = 0; s < slice; ++s) {
    if (std::abs(values[s] - left) > 1e-10 * scale) {
      throw ValidationError("grid potential: H(-x0, y) must not depend on y (k would not vanish left of -x0)");
    }
    if (std::abs(values[last + s] - right) > 1e-10 * scale) {
      throw ValidationError("grid potential: H(0, y) must not depend on y (k would not vanish right of 0)");
    }
  }
  for (double& v : values) v -= left;
  for (std::size_t s = 0; s < slice; ++s) {
    values[s] = 0.0;
    values[last + s] = right - left;
  }
  g->axes = std::move(axes);
  g->values = std::move(values);
  DriftField d;
  d.family_ = Family::GridPotential;
  d.x0_ = -g->axes[0].front();
  d.eps_ = std::numeric_limits<double>::quiet_NaN();
  d.C_ = std::numeric_limits<double>::quiet_NaN();
  d.gauge_ = left;
  d.grid_ = std::move(g);
  return d;
}

DriftField DriftField::grid_from_csv(const std::filesystem::path& path) {
  const auto rows = read_numeric_csv(path, 4);
  const std::size_t d = rows.front().size() - 1;
  std::vector<std::vector<double>> axes(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (const auto& r : rows) axes[i].push_back(r[i]);
    std::sort(axes[i].begin(), axes[i].end());
    axes[i].erase(std::unique(axes[i].begin(), axes[i].end(),
                              [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }),
                  axes[i].end());
  }
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  if (total != rows.size()) {
    throw ValidationError(path.string() + ": rows do not form a full tensor grid (" + std::to_string(rows.size()) +
                          " rows, " + std::to_string(total) + " grid points)");
  }
  std::vector<double> values(total, std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : rows) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const auto it = std::lower_bound(axes[i].begin(), axes[i].end(), r[i] - 1e-12 * std::max(1.0, std::abs(r[i])));
      idx = idx * axes[i].size() + static_cast<std::size_t>(it - axes[i].begin());
    }
    if (!std::isnan(values[idx])) throw ValidationError(path.string() + ": duplicate grid point");
    values[idx] = r[d];
  }
  return grid(std::move(axes), std::move(values));
}

int DriftField::cross_dim() const noexcept { return grid_ ? static_cast<int>(grid_->dims()) - 1 : 0; }

DriftField DriftField::with_gauge_shift(double c) const {
  DriftField d = *this;
  d.gauge_ += c;
  return d;
}

DriftField DriftField::scaled(double s) const {
  DriftField d = *this;
  switch (family_) {
    case Family::Concentrated:
      d.C_ *= s;
      break;
    case Family::AxialBump:
      for (auto& v : d.g_) v *= s;
      for (auto& v : d.H_knots_) v *= s;
      break;
    case Family::GridPotential:
      d.scale_ *= s;
      break;
  }
  return d;
}

double DriftField::Hn(double x1, std::span<const double> y) const {
  switch (family_) {
    case Family::Concentrated:
      return C_ * std::clamp((x1 + eps_) / eps_, 0.0, 1.0);
    case Family::AxialBump: {
      if (x1 <= knots_.front()) return 0.0;
      if (x1 >= knots_.back()) return H_knots_.back();
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), x1);
      const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
      const double h = knots_[i + 1] - knots_[i];
      const double t = x1 - knots_[i];
      return H_knots_[i] + g_[i] * t + 0.5 * (g_[i + 1] - g_[i]) * t * t / h;
    }
    case Family::GridPotential: {
      std::array<double, kMaxDims> x{};
      x[0] = x1;
      for (std::size_t i = 1; i < grid_->dims(); ++i) x[i] = y[i - 1];
      return scale_ * grid_->eval(std::span<const double>(x.data(), grid_->dims()), -1);
    }
  }
  throw InternalError("unknown drift family");
}

double DriftField::H(double x1, std::span<const double> y) const { return Hn(x1, y) + gauge_; }

double DriftField::psi(double x1, std::span<const double> y) const { return std::exp(-H(x1, y)); }

double DriftField::k1(double x1, std::span<const double> y) const {
  if (x1 < -x0_ || x1 > 0.0) return 0.0;
  switch (family_) {
    case Family::Concentrated:
      return (x1 == -eps_ || x1 == 0.0) ? 0.5 * C_ / eps_ : C_ / eps_;
    case Family::AxialBump: {
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), x1);
      const std::size_t i = std::min(static_cast<std::size_t>(it - knots_.begin()), knots_.size() - 1);
      if (i == 0) return g_.front();
      const double t = (x1 - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
      return (1.0 - t) * g_[i - 1] + t * g_[i];
    }
    case Family::GridPotential: {
      std::array<double, kMaxDims> x{};
      x[0] = x1;
      for (std::size_t i = 1; i < grid_->dims(); ++i) x[i] = y[i - 1];
      return scale_ * grid_->eval(std::span<const double>(x.data(), grid_->dims()), 0);
    }
  }
  throw InternalError("unknown drift family");
}

std::vector<double> DriftField::k(double x1, std::span<const double> y) const {
  std::vector<double> out(1 + y.size(), 0.0);
  out[0] = k1(x1, y);
  if (family_ == Family::GridPotential && x1 >= -x0_ && x1 <= 0.0) {
    std::array<double, kMaxDims> x{};
    x[0] = x1;
    for (std::size_t i = 1; i < grid_->dims(); ++i) x[i] = y[i - 1];
    for (std::size_t i = 1; i < grid_->dims() && i < out.size(); ++i) out[i] = scale_ * grid_->eval(std::span<const double>(x.data(), grid_->dims()), static_cast<int>(i));
  }
  return out;
}

double DriftField::max_abs_k() const {
  switch (family_) {
    case Family::Concentrated:
      return std::abs(C_) / eps_;
    case Family::AxialBump: {
      double m = 0.0;
      for (double v : g_) m = std::max(m, std::abs(v));
      return m;
    }
    case Family::GridPotential: {
      // gradient of a multilinear cell is extremal at its corners
      const auto& G = *grid_;
      const std::size_t d = G.dims();
      double m = 0.0;
      std::vector<std::size_t> idx(d, 0);
      std::vector<double> x(d);
      std::vector<double> kk;
      const std::size_t total = G.values.size();
      for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t i = 0; i < d; ++i) {
          idx[i] = rem / G.strides[i];
          rem %= G.strides[i];
        }
        // evaluate each adjacent cell's gradient at this vertex
        for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
          bool ok = true;
          for (std::size_t i = 0; i < d; ++i) {
            const bool up = (corner >> i) & 1U;
            if ((up && idx[i] + 1 >= G.axes[i].size()) || (!up && idx[i] == 0)) ok = false;
            if (!ok) break;
            const double lo = G.axes[i][up ? idx[i] : idx[i] - 1];
            const double hi = G.axes[i][up ? idx[i] + 1 : idx[i]];
            x[i] = G.axes[i][idx[i]] + (up ? 1e-9 : -1e-9) * (hi - lo);
          }
          if (!ok) continue;
          double s = 0.0;
          for (std::size_t i = 0; i < d; ++i) {
            const double v = G.eval(x, static_cast<int>(i));
            s += v * v;
          }
          m = std::max(m, std::sqrt(s));
        }
      }
      return std::abs(scale_) * m;
    }
  }
  throw InternalError("unknown drift family");
}

double DriftField::line_integral_k1(double x1, std::span<const double> y) const {
  return Hn(std::clamp(x1, -x0_, 0.0), y) - Hn(-x0_, y);
}

std::vector<double> DriftField::axial_breaks() const {
  switch (family_) {
    case Family::Concentrated:
      return {-x0_, 0.0};
    case Family::AxialBump:
      return knots_;
    case Family::GridPotential:
      return grid_->axes[0];
  }
  throw InternalError("unknown drift family");
}

std::vector<double> DriftField::cross_breaks(int i) const {
  if (!grid_) return {};
  return grid_->axes.at(static_cast<std::size_t>(i) + 1);
}

double DriftSummary::exp_integral(double r) const {
  for (const auto& [rr, v] : exp_integrals) {
    if (rr == r) return v;
  }
  throw std::out_of_range("exp_integral: exponent " + std::to_string(r) + " was not requested");
}

namespace {

// Composite midpoint rule over a tensor product of panels, m[i] points per
// panel along axis i.
double panel_midpoint(const std::vector<std::vector<double>>& breaks, const std::vector<int>& m,
                      const std::function<double(std::span<const double>)>& g) {
  const std::size_t d = breaks.size();
  std::vector<std::vector<double>> nodes(d), weights(d);
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k + 1 < breaks[i].size(); ++k) {
      const double h = (breaks[i][k + 1] - breaks[i][k]) / m[i];
      for (int j = 0; j < m[i]; ++j) {
        nodes[i].push_back(breaks[i][k] + (j + 0.5) * h);
        weights[i].push_back(h);
      }
    }
    total *= nodes[i].size();
  }
  if (total > 200'000'000ULL) throw ConvergenceError("drift quadrature exceeded its point budget");
  std::vector<double> x(d);
  std::vector<std::size_t> idx(d, 0);
  double sum = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = nodes[i][idx[i]];
      w *= weights[i][idx[i]];
    }
    sum += w * g(x);
    for (std::size_t i = d; i-- > 0;) {
      if (++idx[i] < nodes[i].size()) break;
      idx[i] = 0;
    }
  }
  return sum;
}

// Dyadic refinement of panel_midpoint with a Romberg table on the h^2
// error expansion of the midpoint rule.
double adaptive_integral(const std::vector<std::vector<double>>& breaks,
                         const std::function<double(std::span<const double>)>& g, const SummaryOptions& o,
                         const std::string& what) {
  std::vector<int> m(breaks.size());
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    const int panels = static_cast<int>(breaks[i].size()) - 1;
    m[i] = std::max(1, (o.quad_resolution + panels - 1) / panels);
  }
  std::vector<double> row{panel_midpoint(breaks, m, g)};
  for (int depth = 1; depth <= o.max_depth; ++depth) {
    for (auto& v : m) v *= 2;
    std::vector<double> next{panel_midpoint(breaks, m, g)};
    double factor = 1.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      factor *= 4.0;
      next.push_back(next[j] + (next[j] - row[j]) / (factor - 1.0));
    }
    const double best = next.back();
    const double scale = std::max(std::abs(best), std::numeric_limits<double>::min());
    if (std::abs(next[0] - row[0]) <= o.rel_tol * scale) return next[0];
    if (std::abs(best - row.back()) <= o.rel_tol * scale) return best;
    row = std::move(next);
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "quadrature for " << what << " did not converge to relative " << o.rel_tol << " (last estimates "
      << row[0] << ", " << row.back() << ")";
  throw ConvergenceError(msg.str());
}

}  // namespace

double integrate_slab(const DriftField& d, const CrossSection& cs,
                      const std::function<double(double, std::span<const double>)>& g, const SummaryOptions& options,
                      const std::string& what) {
  std::vector<std::vector<double>> br{d.axial_breaks()};
  if (d.is_axial()) {
    std::vector<double> ymid(cs.dim());
    for (int i = 0; i < cs.dim(); ++i) ymid[i] = 0.5 * cs.lengths()[i];
    return cs.measure() * adaptive_integral(br, [&](std::span<const double> x) { return g(x[0], ymid); }, options, what);
  }
  for (int i = 0; i < cs.dim(); ++i) br.push_back(d.cross_breaks(i));
  return adaptive_integral(br, [&](std::span<const double> x) { return g(x[0], x.subspan(1)); }, options, what);
}

DriftSummary summarize(const DriftField& d, const CrossSection& cs, const std::vector<double>& exponents,
                       const SummaryOptions& options) {
  if (options.quad_resolution < 8) throw ValidationError("summarize: quad_resolution must be >= 8 points per axis");
  if (!d.is_axial()) {
    if (d.cross_dim() != cs.dim()) {
      throw ValidationError("grid potential has " + std::to_string(d.cross_dim()) +
                            " cross-section axes but the cross-section has " + std::to_string(cs.dim()));
    }
    for (int i = 0; i < cs.dim(); ++i) {
      const auto b = d.cross_breaks(i);
      if (std::abs(b.front()) > 1e-9 || std::abs(b.back() - cs.lengths()[i]) > 1e-9) {
        throw ValidationError("grid potential does not cover the cross-section along axis " + std::to_string(i + 1));
      }
    }
  }
  DriftSummary s;
  s.x0 = d.x0();
  s.measure = cs.measure();
  std::vector<double> ymid(cs.dim());
  for (int i = 0; i < cs.dim(); ++i) ymid[i] = 0.5 * cs.lengths()[i];

  // net drift: H(0, y) is constant in y for every family
  s.net_drift = d.line_integral_k1(0.0, ymid);
  // psi ratio from the gauge-free weight exp(-H + H(-x0, y)); the
  // denominator is 1 pointwise but is integrated like the numerator
  auto psi_n = [&](double x1, std::span<const double> y) { return std::exp(-d.line_integral_k1(x1, y)); };
  if (d.is_axial()) {
    s.psi_ratio = psi_n(0.0, ymid) / psi_n(-d.x0(), ymid);
  } else {
    std::vector<std::vector<double>> yb;
    for (int i = 0; i < cs.dim(); ++i) yb.push_back(d.cross_breaks(i));
    const double top = adaptive_integral(yb, [&](std::span<const double> y) { return psi_n(0.0, y); }, options, "psi(0)");
    const double bot =
        adaptive_integral(yb, [&](std::span<const double> y) { return psi_n(-d.x0(), y); }, options, "psi(-x0)");
    s.psi_ratio = top / bot;
  }

  // sup of exp(-line integral) = exp(-min of the normalized potential)
  double hmin = 0.0;
  if (d.is_axial()) {
    const auto br = d.axial_breaks();
    auto Hx = [&](double x) { return d.line_integral_k1(x, ymid); };
    double best_x = br.front();
    for (double x : br) {
      if (Hx(x) < hmin) {
        hmin = Hx(x);
        best_x = x;
      }
    }
    const int samples = 8 * options.quad_resolution * static_cast<int>(br.size());
    for (int i = 0; i <= samples; ++i) {
      const double x = -d.x0() + d.x0() * i / samples;
      if (Hx(x) < hmin) {
        hmin = Hx(x);
        best_x = x;
      }
    }
    const double span = d.x0() / samples;
    const auto r = boost::math::tools::brent_find_minima(Hx, std::max(-d.x0(), best_x - span),
                                                         std::min(0.0, best_x + span), 52);
    hmin = std::min(hmin, r.second);
  } else {
    // multilinear cells attain their extremes at vertices
    std::vector<std::vector<double>> axes{d.axial_breaks()};
    for (int i = 0; i < cs.dim(); ++i) axes.push_back(d.cross_breaks(i));
    std::vector<std::size_t> idx(axes.size(), 0);
    std::vector<double> y(cs.dim());
    while (true) {
      for (int i = 0; i < cs.dim(); ++i) y[i] = axes[i + 1][idx[i + 1]];
      hmin = std::min(hmin, d.line_integral_k1(axes[0][idx[0]], y));
      std::size_t i = axes.size();
      while (i-- > 0) {
        if (++idx[i] < axes[i].size()) break;
        idx[i] = 0;
      }
      if (i == static_cast<std::size_t>(-1)) break;
    }
  }
  s.sup_exp_neg = std::exp(-hmin);

  for (double r : exponents) {
    const double v = integrate_slab(
        d, cs, [&](double x1, std::span<const double> y) { return std::exp(r * d.line_integral_k1(x1, y)); }, options,
        "exp_integral");
    s.exp_integrals.emplace_back(r, v);
  }
  return s;
}

}  // namespace front_blocker
