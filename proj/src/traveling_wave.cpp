#include "front_blocker/traveling_wave.hpp"

#include "front_blocker/error.hpp"

#include <boost/math/interpolators/cubic_hermite.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace front_blocker {

namespace {

constexpr double kSeed = 1e-7;  // distance from the saddles where the branches start

struct Branch {
  std::vector<double> phi;
  std::vector<double> p;
  bool reached = true;  // false if p collapsed to zero before theta
};

double unstable_rate_at_zero(double c, double fp0) { return 0.5 * (c + std::sqrt(c * c - 4.0 * fp0)); }
double stable_rate_at_one(double c, double fp1) { return 0.5 * (std::sqrt(c * c - 4.0 * fp1) - c); }

// RK4 on dp/dphi = c - f(phi)/p from `from` to `to` (either direction).
Branch integrate_branch(const ExtendedNonlinearity& nl, double c, double from, double p_from, double to,
                        int steps, bool keep) {
  Branch b;
  const double h = (to - from) / steps;
  auto rhs = [&](double phi, double p) { return c - nl.f(phi) / p; };
  double phi = from;
  double p = p_from;
  if (keep) {
    b.phi.reserve(steps + 1);
    b.p.reserve(steps + 1);
    b.phi.push_back(phi);
    b.p.push_back(p);
  }
  for (int k = 0; k < steps; ++k) {
    const double k1 = rhs(phi, p);
    const double p2 = p + 0.5 * h * k1;
    if (p2 <= 0.0) {
      b.reached = false;
      break;
    }
    const double k2 = rhs(phi + 0.5 * h, p2);
    const double p3 = p + 0.5 * h * k2;
    if (p3 <= 0.0) {
      b.reached = false;
      break;
    }
    const double k3 = rhs(phi + 0.5 * h, p3);
    const double p4 = p + h * k3;
    if (p4 <= 0.0) {
      b.reached = false;
      break;
    }
    const double k4 = rhs(phi + h, p4);
    p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    phi = from + (k + 1) * h;
    if (p <= 0.0) {
      b.reached = false;
      break;
    }
    if (keep) {
      b.phi.push_back(phi);
      b.p.push_back(p);
    }
  }
  if (!keep) {
    b.phi = {phi};
    b.p = {b.reached ? p : 0.0};
  }
  return b;
}

struct Shot {
  double mismatch;
  Branch left;
  Branch right;
};

Shot shoot(const ExtendedNonlinearity& nl, double c, int steps, bool keep) {
  const double theta = nl.theta();
  const double lam = unstable_rate_at_zero(c, nl.slope_at_zero());
  const double kap = stable_rate_at_one(c, nl.slope_at_one());
  Shot s{0.0, integrate_branch(nl, c, kSeed, lam * kSeed, theta, steps, keep),
         integrate_branch(nl, c, 1.0 - kSeed, kap * kSeed, theta, steps, keep)};
  const double pl = s.left.reached ? s.left.p.back() : 0.0;
  const double pr = s.right.reached ? s.right.p.back() : 0.0;
  s.mismatch = pl - pr;
  return s;
}

}  // namespace

struct WaveProfile::Interp {
  boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>> spline;
};

void WaveProfile::build_interpolant() {
  std::vector<double> y = phi_;
  std::vector<double> d = dphi_;
  interp_ = std::make_shared<const Interp>(
      Interp{boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>(std::move(y), std::move(d),
                                                                                     z_.front(), dz_)});
}

double WaveProfile::at(double z) const {
  const double z0 = z_.front();
  const double z1 = z_.back();
  if (z <= z0) return phi_.front() * std::exp(lambda_ * (z - z0));
  if (z >= z1) return 1.0 - (1.0 - phi_.back()) * std::exp(-kappa_ * (z - z1));
  return std::clamp(interp_->spline(z), 0.0, 1.0);
}

double WaveProfile::width() const { return 1.0 / *std::max_element(dphi_.begin(), dphi_.end()); }

double WaveProfile::ode_residual(const ExtendedNonlinearity& nl) const {
  double worst = 0.0;
  const double h = dz_;
  for (std::size_t i = 1; i + 1 < phi_.size(); ++i) {
    const double second = (phi_[i + 1] - 2.0 * phi_[i] + phi_[i - 1]) / (h * h);
    const double first = (phi_[i + 1] - phi_[i - 1]) / (2.0 * h);
    worst = std::max(worst, std::abs(second - c_ * first + nl.f(phi_[i])));
  }
  return worst;
}

WaveProfile WaveProfile::shifted(double shift) const {
  WaveProfile w = *this;
  for (auto& z : w.z_) z += shift;
  w.build_interpolant();
  return w;
}

double wave_at(const WaveProfile& w, double z) { return w.at(z); }

WaveProfile solve_wave(const ExtendedNonlinearity& nl, double tol) {
  WaveSolveOptions o;
  o.tol = tol;
  return solve_wave(nl, o);
}

WaveProfile solve_wave(const ExtendedNonlinearity& nl, const WaveSolveOptions& options) {
  const int steps = options.phase_steps;

  // Bracket the speed. The mismatch p_left(theta) - p_right(theta) increases
  // with c; its sign at c = 0 is the sign of -\int_0^1 f.
  double lo = 0.0, hi = 0.0;
  const double m0 = shoot(nl, 0.0, steps, false).mismatch;
  if (m0 == 0.0) {
    lo = hi = 0.0;
  } else {
    const double dir = m0 < 0.0 ? 1.0 : -1.0;
    double step = 0.25;
    double prev = 0.0;
    bool found = false;
    for (int k = 0; k < 60; ++k) {
      const double c = dir * step;
      const double m = shoot(nl, c, steps, false).mismatch;
      if ((m > 0.0) != (m0 > 0.0)) {
        lo = std::min(prev, c);
        hi = std::max(prev, c);
        found = true;
        break;
      }
      prev = c;
      step *= 2.0;
    }
    if (!found) throw ConvergenceError("no sign change in shooting functional");
  }

  int it = 0;
  double m_lo = shoot(nl, lo, steps, false).mismatch;
  while (hi - lo > options.tol) {
    if (++it > options.max_iterations) {
      std::ostringstream msg;
      msg << "wave speed bisection did not reach tol " << options.tol << " in " << options.max_iterations
          << " iterations (bracket width " << hi - lo << ")";
      throw ConvergenceError(msg.str());
    }
    const double mid = 0.5 * (lo + hi);
    const double m = shoot(nl, mid, steps, false).mismatch;
    if (m == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((m > 0.0) == (m_lo > 0.0)) {
      lo = mid;
      m_lo = m;
    } else {
      hi = mid;
    }
  }
  const double c = 0.5 * (lo + hi);
  Shot shot = shoot(nl, c, steps, true);
  if (!shot.left.reached || !shot.right.reached) {
    throw ConvergenceError("phase-plane branch collapsed at the converged speed");
  }

  WaveProfile w;
  w.c_ = c;
  w.theta_ = nl.theta();
  w.lambda_ = unstable_rate_at_zero(c, nl.slope_at_zero());
  w.kappa_ = stable_rate_at_one(c, nl.slope_at_one());
  w.iterations_ = it;
  w.shooting_residual_ = std::abs(shot.mismatch);

  // p(phi) on one increasing table: left branch up to theta, right branch
  // (integrated downward) reversed, meeting values averaged.
  std::vector<double> ph = shot.left.phi;
  std::vector<double> pp = shot.left.p;
  pp.back() = 0.5 * (shot.left.p.back() + shot.right.p.back());
  for (std::size_t k = shot.right.phi.size() - 1; k-- > 0;) {
    ph.push_back(shot.right.phi[k]);
    pp.push_back(shot.right.p[k]);
  }
  std::vector<double> dp(ph.size());
  for (std::size_t k = 0; k < ph.size(); ++k) dp[k] = c - nl.f(ph[k]) / pp[k];
  const double phi_first = ph.front();
  const double phi_last = ph.back();
  const double lam = w.lambda_;
  const double kap = w.kappa_;
  boost::math::interpolators::cubic_hermite<std::vector<double>> p_of_phi(std::move(ph), std::move(pp),
                                                                          std::move(dp));
  auto P = [&](double phi) {
    if (phi <= phi_first) return lam * std::max(phi, 0.0);
    if (phi >= phi_last) return kap * std::max(1.0 - phi, 0.0);
    return p_of_phi(phi);
  };

  // dphi/dz = P(phi) from phi(0) = theta in both directions.
  const double h = options.z_step;
  auto rk4 = [&](double phi, double step) {
    const double k1 = P(phi);
    const double k2 = P(phi + 0.5 * step * k1);
    const double k3 = P(phi + 0.5 * step * k2);
    const double k4 = P(phi + step * k3);
    return phi + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  constexpr std::size_t kMaxHalf = 2'000'000;
  std::vector<double> fwd{nl.theta()};
  while (1.0 - fwd.back() > options.tail_level) {
    fwd.push_back(rk4(fwd.back(), h));
    if (fwd.size() > kMaxHalf) throw ConvergenceError("wave profile right tail did not flatten");
  }
  std::vector<double> bwd{nl.theta()};
  while (bwd.back() > options.tail_level) {
    bwd.push_back(rk4(bwd.back(), -h));
    if (bwd.size() > kMaxHalf) throw ConvergenceError("wave profile left tail did not flatten");
  }
  const std::size_t nb = bwd.size() - 1;
  w.dz_ = h;
  w.z_.resize(nb + fwd.size());
  w.phi_.resize(w.z_.size());
  w.dphi_.resize(w.z_.size());
  for (std::size_t k = 0; k < w.z_.size(); ++k) {
    const double v = k < nb ? bwd[nb - k] : fwd[k - nb];
    w.z_[k] = (static_cast<double>(k) - static_cast<double>(nb)) * h;
    w.phi_[k] = v;
    w.dphi_[k] = P(v);
  }
  w.build_interpolant();
  return w;
}

}  // namespace front_blocker
