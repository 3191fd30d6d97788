#include "front_blocker/nonlinearity.hpp"

#include "front_blocker/error.hpp"

#include <cmath>

// boost 1.74 pchip calls isnan unqualified
using std::isnan;

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

namespace front_blocker {

namespace {

constexpr double kCubicZeroTol = 1e-12;
constexpr double kTableZeroTol = 1e-8;
constexpr int kSignSamples = 4001;

// Second-order one-sided derivative from three (possibly nonuniform) points.
double three_point_slope(double x0, double x1, double x2, double y0, double y1, double y2) {
  const double h1 = x1 - x0;
  const double h2 = x2 - x1;
  return -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * y0 + (h1 + h2) / (h1 * h2) * y1 -
         h1 / (h2 * (h1 + h2)) * y2;
}

}  // namespace

struct BistableNonlinearity::Table {
  using Interp = boost::math::interpolators::pchip<std::vector<double>>;

  Table(std::vector<double> u, std::vector<double> f)
      : x(u), y(f), interp(make(std::move(u), std::move(f))) {
    const std::size_t n = x.size();
    slope.resize(n);
    for (std::size_t i = 0; i < n; ++i) slope[i] = interp.prime(x[i]);
    // Cumulative \int_{x_i}^1 f, exact for cubic segments (two-point Gauss).
    tail.assign(n, 0.0);
    for (std::size_t i = n - 1; i-- > 0;) tail[i] = tail[i + 1] + segment_integral(i, x[i], x[i + 1]);
    f2_sup = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      f2_sup = std::max({f2_sup, std::abs(second(i, 0.0)), std::abs(second(i, 1.0))});
    }
  }

  static Interp make(std::vector<double> u, std::vector<double> f) {
    const std::size_t n = u.size();
    const double left = three_point_slope(u[0], u[1], u[2], f[0], f[1], f[2]);
    const double right = -three_point_slope(-u[n - 1], -u[n - 2], -u[n - 3], f[n - 1], f[n - 2], f[n - 3]);
    return Interp(std::move(u), std::move(f), left, right);
  }

  std::size_t segment(double s) const {
    auto it = std::upper_bound(x.begin(), x.end(), s);
    std::size_t i = static_cast<std::size_t>(std::distance(x.begin(), it));
    if (i == 0) return 0;
    return std::min(i - 1, x.size() - 2);
  }

  double segment_integral(std::size_t i, double a, double b) const {
    if (b <= a) return 0.0;
    (void)i;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double off = half / std::sqrt(3.0);
    return half * (interp(mid - off) + interp(mid + off));
  }

  // Second derivative of the Hermite cubic on segment i at local t in [0,1].
  double second(std::size_t i, double t) const {
    const double h = x[i + 1] - x[i];
    return ((12.0 * t - 6.0) * y[i] + (6.0 * t - 4.0) * h * slope[i] + (6.0 - 12.0 * t) * y[i + 1] +
            (6.0 * t - 2.0) * h * slope[i + 1]) /
           (h * h);
  }

  double primitive(double s) const {
    const std::size_t i = segment(s);
    return tail[i + 1] + segment_integral(i, s, x[i + 1]);
  }

  std::vector<double> x, y, slope, tail;
  Interp interp;
  double f2_sup = 0.0;
};

BistableNonlinearity BistableNonlinearity::cubic(double theta, Checks checks) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ValidationError("F4 violated: unstable zero theta = " + std::to_string(theta) +
                          " must lie in (0,1)");
  }
  BistableNonlinearity nl;
  nl.kind_ = Kind::Cubic;
  nl.theta_ = theta;
  nl.validate(checks);
  return nl;
}

BistableNonlinearity BistableNonlinearity::tabulated(std::vector<double> u, std::vector<double> f,
                                                     Checks checks) {
  if (u.size() != f.size()) throw ValidationError("tabulated nonlinearity: column lengths differ");
  if (u.size() < 5) throw ValidationError("tabulated nonlinearity: need at least 5 samples");
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (!(u[i] > u[i - 1])) throw ValidationError("tabulated nonlinearity: u samples must increase strictly");
  }
  if (std::abs(u.front()) > 1e-12 || std::abs(u.back() - 1.0) > 1e-12) {
    throw ValidationError("tabulated nonlinearity: samples must span exactly [0,1]");
  }
  u.front() = 0.0;
  u.back() = 1.0;

  BistableNonlinearity nl;
  nl.kind_ = Kind::Tabulated;
  nl.table_u_ = u;
  nl.table_f_ = f;
  nl.table_ = std::make_shared<const Table>(std::move(u), std::move(f));

  // Unstable zero: first sign change of the interpolant from - to +.
  double theta = std::numeric_limits<double>::quiet_NaN();
  const auto& t = *nl.table_;
  double prev_u = 1e-6;
  double prev_f = t.interp(prev_u);
  for (int k = 1; k < kSignSamples; ++k) {
    const double uk = 1e-6 + (1.0 - 2e-6) * k / (kSignSamples - 1);
    const double fk = t.interp(uk);
    if (prev_f < 0.0 && fk >= 0.0) {
      double lo = prev_u, hi = uk;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (t.interp(mid) < 0.0 ? lo : hi) = mid;
      }
      theta = 0.5 * (lo + hi);
      break;
    }
    prev_u = uk;
    prev_f = fk;
  }
  if (!std::isfinite(theta)) throw ValidationError("F4 violated: tabulated f has no sign change from - to +");
  nl.theta_ = theta;
  nl.validate(checks);
  return nl;
}

BistableNonlinearity BistableNonlinearity::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open nonlinearity table " + path.string());
  std::vector<double> u, f;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a, b;
    if (!(ss >> a >> b)) {
      if (u.empty()) continue;  // header row
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    u.push_back(a);
    f.push_back(b);
  }
  return tabulated(std::move(u), std::move(f));
}

double BistableNonlinearity::zero_tolerance() const noexcept {
  return kind_ == Kind::Cubic ? kCubicZeroTol : kTableZeroTol;
}

double BistableNonlinearity::f(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  if (kind_ == Kind::Cubic) return u * (1.0 - u) * (u - theta_);
  return table_->interp(u);
}

double BistableNonlinearity::f_prime(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  if (kind_ == Kind::Cubic) return -3.0 * u * u + 2.0 * (1.0 + theta_) * u - theta_;
  return table_->interp.prime(u);
}

double BistableNonlinearity::f_second(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  if (kind_ == Kind::Cubic) return -6.0 * u + 2.0 * (1.0 + theta_);
  const std::size_t i = table_->segment(u);
  const double t = (u - table_->x[i]) / (table_->x[i + 1] - table_->x[i]);
  return table_->second(i, t);
}

double BistableNonlinearity::primitive(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  if (kind_ == Kind::Cubic) {
    const double th = theta_;
    auto antiderivative = [th](double u) {
      return -0.25 * u * u * u * u + (1.0 + th) * u * u * u / 3.0 - 0.5 * th * u * u;
    };
    return antiderivative(1.0) - antiderivative(s);
  }
  return table_->primitive(s);
}

double BistableNonlinearity::f_second_sup() const {
  if (kind_ == Kind::Cubic) return std::max(std::abs(2.0 + 2.0 * theta_), std::abs(4.0 - 2.0 * theta_));
  return table_->f2_sup;
}

void BistableNonlinearity::validate(Checks checks) const {
  const double tol = zero_tolerance();
  if (std::abs(f(0.0)) > tol || std::abs(f(1.0)) > tol) {
    throw ValidationError("F2 violated: f(0) = " + std::to_string(f(0.0)) + ", f(1) = " + std::to_string(f(1.0)));
  }
  if (!(f_prime(0.0) < 0.0) || !(f_prime(1.0) < 0.0)) {
    throw ValidationError("F3 violated: need f'(0) < 0 and f'(1) < 0, got " + std::to_string(f_prime(0.0)) +
                          ", " + std::to_string(f_prime(1.0)));
  }
  // Sign pattern on a dense grid, skipping a small neighbourhood of the zeros.
  const double guard = kind_ == Kind::Cubic ? 1e-9 : 1e-6;
  for (int k = 1; k < kSignSamples - 1; ++k) {
    const double u = static_cast<double>(k) / (kSignSamples - 1);
    if (std::abs(u - theta_) < guard) continue;
    const double v = f(u);
    if ((u < theta_ && v >= 0.0) || (u > theta_ && v <= 0.0)) {
      throw ValidationError("F4 violated: f has the wrong sign at u = " + std::to_string(u));
    }
  }
  if (checks == Checks::All && !(primitive(0.0) > 0.0)) {
    throw ValidationError("F8 violated: \\int_0^1 f = " + std::to_string(primitive(0.0)) + " is not positive");
  }
}

ExtendedNonlinearity::ExtendedNonlinearity(BistableNonlinearity base)
    : base_(std::move(base)),
      fp0_(base_.f_prime(0.0)),
      fp1_(base_.f_prime(1.0)),
      F0_(base_.primitive(0.0)) {}

double ExtendedNonlinearity::f(double s) const {
  if (s < 0.0) return fp0_ * s;
  if (s > 1.0) return fp1_ * (s - 1.0);
  return base_.f(s);
}

double ExtendedNonlinearity::f_prime(double s) const {
  if (s < 0.0) return fp0_;
  if (s > 1.0) return fp1_;
  return base_.f_prime(s);
}

double ExtendedNonlinearity::f_second(double s) const {
  if (s < 0.0 || s > 1.0) return 0.0;
  return base_.f_second(s);
}

double ExtendedNonlinearity::F(double s) const {
  if (s < 0.0) return F0_ - 0.5 * fp0_ * s * s;
  if (s > 1.0) return -0.5 * fp1_ * (s - 1.0) * (s - 1.0);
  return base_.primitive(s);
}

double ExtendedNonlinearity::taylor_remainder(double s) const {
  // F'(0) = -f(0) = 0 and F''(0) = -f'(0).
  if (s <= 0.0) {
    // The quadratic Taylor polynomial reproduces F exactly on the linear branch.
    return F(s) - (F0_ - 0.5 * fp0_ * s * s);
  }
  return F(s) - F0_ + base_.f(0.0) * s + 0.5 * fp0_ * s * s;
}

double eval_F(const ExtendedNonlinearity& nl, double s) { return nl.F(s); }

NonlinearityConstants compute_constants(const ExtendedNonlinearity& nl) {
  NonlinearityConstants c;
  const double fp0 = nl.slope_at_zero();
  const double fp1 = nl.slope_at_one();
  c.F0 = nl.F0();
  c.alpha = std::min(0.25, -fp0 / 4.0);
  c.mu = c.F0 - 0.5 * (fp0 + fp1);
  c.f2_inf = nl.base().f_second_sup();
  c.Fmax = std::max(nl.F(nl.theta()), c.F0);

  // K = inf_s F(s)/(s-1)^2. Dense scan on [-5,5], golden-section polish
  // around the best sample, analytic tails outside.
  auto ratio = [&nl, fp1](double s) {
    const double d = s - 1.0;
    if (std::abs(d) < 1e-7) return -0.5 * fp1;
    return nl.F(s) / (d * d);
  };
  constexpr int kScan = 20001;
  double best = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  int best_k = 0;
  for (int k = 0; k < kScan; ++k) {
    const double s = -5.0 + 10.0 * k / (kScan - 1);
    const double r = ratio(s);
    if (r < best) {
      best = r;
      best_s = s;
      best_k = k;
    }
  }
  {
    const double lo = -5.0 + 10.0 * std::max(best_k - 1, 0) / (kScan - 1);
    const double hi = -5.0 + 10.0 * std::min(best_k + 1, kScan - 1) / (kScan - 1);
    auto [s_star, r_star] = boost::math::tools::brent_find_minima(ratio, lo, hi, 52);
    if (r_star < best) {
      best = r_star;
      best_s = s_star;
    }
  }
  // s > 5: F(s)/(s-1)^2 = -f'(1)/2 exactly.
  if (-0.5 * fp1 < best) {
    best = -0.5 * fp1;
    best_s = std::numeric_limits<double>::infinity();
  }
  // s < -5: g(s) = (F0 - f'(0) s^2/2)/(s-1)^2 has its only critical point at
  // s* = -F0/(-f'(0)/2); on (-inf,-5] the infimum is g(s*) when s* <= -5 and
  // g(-5) (already scanned) otherwise.
  const double a = -0.5 * fp0;
  const double s_crit = -c.F0 / a;
  if (s_crit < -5.0) {
    const double g = a * c.F0 / (a + c.F0);
    if (g < best) {
      best = g;
      best_s = s_crit;
    }
  }
  c.K = best;
  c.K_argmin = best_s;
  if (!(c.K > 0.0)) throw InternalError("quadratic lower bound constant K is not positive");
  return c;
}

double gamma_tilde(const NonlinearityConstants& constants, double gamma, double exponent_q) {
  const double f2 = constants.f2_inf;
  if (3.0 - exponent_q >= 0.0 || f2 == 0.0) return std::max(f2, constants.mu);
  return std::max(f2 * std::pow(gamma / f2, 3.0 - exponent_q), constants.mu);
}

double eta_remainder_bound(const NonlinearityConstants& constants, double s) {
  if (s <= 0.0) return 0.0;
  if (s < 1.0) return constants.f2_inf * s * s * s;
  return constants.mu * s * s;
}

}  // namespace front_blocker
