#include "front_blocker/simulator.hpp"

#include "front_blocker/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace front_blocker {

std::string to_string(Stepper s) {
  return s == Stepper::Euler ? "euler" : "rk2";
}

std::string to_string(Advection a) {
  switch (a) {
    case Advection::Upwind: return "upwind";
    case Advection::Centered: return "centered";
    case Advection::Fitted: return "fitted";
  }
  return "?";
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Blocked: return "Blocked";
    case Classification::Propagating: return "Propagating";
    case Classification::Undetermined: return "Undetermined";
  }
  return "?";
}

double least_squares_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  if (n < 2) return 0.0;
  double tm = 0.0;
  double ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tm += t[i];
    ym += y[i];
  }
  tm /= n;
  ym /= n;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (t[i] - tm) * (y[i] - ym);
    den += (t[i] - tm) * (t[i] - tm);
  }
  return den > 0.0 ? num / den : 0.0;
}

Simulator::Simulator(const SimConfig& cfg, const ExtendedNonlinearity& nl, const DriftField& d,
                     const CrossSection& cs)
    : cfg_(cfg), nl_(nl), grid_(d, cs, cfg.x_minus, cfg.x_plus, GridResolution{cfg.n_axial, cfg.n_cross}) {
  if (!(cfg.x_minus < -d.x0()) || !(cfg.x_plus > 0.0)) {
    throw ValidationError("simulation domain must contain the drift support [-x0, 0] in its interior");
  }
  if (!(cfg.t_end > cfg.t0)) throw ValidationError("t_end must exceed t0");
  if (cfg.frame_stride < 1) throw ValidationError("frame stride must be positive");
  if (!(cfg.window_fraction > 0.0 && cfg.window_fraction <= 1.0)) {
    throw ValidationError("classification window fraction must lie in (0, 1]");
  }
  const int nd = grid_.dims();
  layer_ = grid_.stride(0);

  off_minus_.assign(nd, std::vector<long>(layer_, 0));
  off_plus_.assign(nd, std::vector<long>(layer_, 0));
  for (int a = 1; a < nd; ++a) {
    const long s = static_cast<long>(grid_.stride(a));
    for (std::size_t j = 0; j < layer_; ++j) {
      const int ia = grid_.index(j, a);
      // ghost reflection: u_{-1} = u_{1}, u_{N} = u_{N-2}
      off_minus_[a][j] = ia == 0 ? s : -s;
      off_plus_[a][j] = ia == grid_.size(a) - 1 ? -s : s;
    }
  }

  if (cfg.advection == Advection::Fitted) {
    sum_kappa_.assign(grid_.node_count(), 0.0);
    for (int a = 0; a < nd; ++a) {
      const auto kap = grid_.kappa(a);
      const std::size_t s = grid_.stride(a);
      for (std::size_t i = 0; i < grid_.node_count(); ++i) {
        if (kap[i] == 0.0) continue;
        sum_kappa_[i] += kap[i];
        sum_kappa_[i + s] += kap[i];
      }
    }
    double worst = 0.0;
    const auto m = grid_.mass();
    for (std::size_t i = 0; i < grid_.node_count(); ++i) worst = std::max(worst, sum_kappa_[i] / m[i]);
    dt_max_ = 1.0 / worst;
  } else {
    const double h = grid_.min_spacing();
    const double kmax = d.max_abs_k();
    dt_max_ = h * h / (2.0 * nd * (1.0 + 0.5 * h * kmax));
  }
  dt_ = cfg.dt > 0.0 ? cfg.dt : 0.9 * dt_max_;
  if (dt_ > dt_max_) {
    std::ostringstream os;
    os << "time step " << dt_ << " exceeds the stability bound " << dt_max_;
    throw ValidationError(os.str());
  }
  k1_.resize(grid_.node_count());
  k2_.resize(grid_.node_count());
}

SimState Simulator::initialize(const WaveProfile& wave) const {
  const double c = wave.speed();
  const double front = -c * cfg_.t0;
  if (!(front > 0.0)) {
    std::ostringstream os;
    os << "initial front at x1 = " << front << " is not right of the drift support (need -c t0 > 0)";
    throw ConfigError(os.str());
  }
  if (!(front < cfg_.x_plus - cfg_.margin)) {
    std::ostringstream os;
    os << "initial front at x1 = " << front << " is too close to X+ = " << cfg_.x_plus;
    throw ConfigError(os.str());
  }
  SimState s;
  s.t = cfg_.t0;
  s.u.resize(grid_.node_count());
  const double left = wave.at(cfg_.x_minus + c * cfg_.t0);
  const double right = wave.at(cfg_.x_plus + c * cfg_.t0);
  if (!(left < 1e-4) || !(right > 1.0 - 1e-4)) {
    std::ostringstream os;
    os << "wave tails not resolved by the domain: u(X-) = " << left << ", u(X+) = " << right;
    throw ValidationError(os.str());
  }
  for (std::size_t i = 0; i < grid_.node_count(); ++i) s.u[i] = wave.at(grid_.x1(i) + c * cfg_.t0);
  const std::size_t last = grid_.node_count() - layer_;
  for (std::size_t j = 0; j < layer_; ++j) {
    s.u[j] = 0.0;
    s.u[last + j] = 1.0;
  }
  return s;
}

void Simulator::rhs(const std::vector<double>& u, std::vector<double>& out) const {
  const int nd = grid_.dims();
  const int n1 = grid_.size(0);
  const auto kv = grid_.drift_at_nodes();
  const long s0 = static_cast<long>(layer_);
  if (cfg_.advection == Advection::Fitted) {
    const auto m = grid_.mass();
    std::fill(out.begin(), out.end(), 0.0);
    for (int a = 0; a < nd; ++a) {
      const auto kap = grid_.kappa(a);
      const std::size_t s = grid_.stride(a);
      for (std::size_t i = 0; i < grid_.node_count(); ++i) {
        if (kap[i] == 0.0) continue;
        const double flux = kap[i] * (u[i + s] - u[i]);
        out[i] += flux;
        out[i + s] -= flux;
      }
    }
    for (std::size_t i = layer_; i + layer_ < grid_.node_count(); ++i) out[i] = out[i] / m[i] + nl_.f(u[i]);
  } else {
    const double h0 = grid_.spacing(0);
    const bool upwind = cfg_.advection == Advection::Upwind;
    for (int i1 = 1; i1 < n1 - 1; ++i1) {
      for (std::size_t j = 0; j < layer_; ++j) {
        const std::size_t node = static_cast<std::size_t>(i1) * layer_ + j;
        const double uc = u[node];
        double lap = 0.0;
        double adv = 0.0;
        for (int a = 0; a < nd; ++a) {
          const double h = a == 0 ? h0 : grid_.spacing(a);
          const double um = u[node + (a == 0 ? -s0 : off_minus_[a][j])];
          const double up = u[node + (a == 0 ? s0 : off_plus_[a][j])];
          lap += (up - 2.0 * uc + um) / (h * h);
          const double k = kv[node * nd + a];
          if (k == 0.0) continue;
          if (upwind) {
            adv += k > 0.0 ? k * (uc - um) / h : k * (up - uc) / h;
          } else {
            adv += k * (up - um) / (2.0 * h);
          }
        }
        out[node] = lap - adv + nl_.f(uc);
      }
    }
  }
  // clamped axial ends
  const std::size_t last = grid_.node_count() - layer_;
  for (std::size_t j = 0; j < layer_; ++j) {
    out[j] = 0.0;
    out[last + j] = 0.0;
  }
}

void Simulator::step(SimState& s) const {
  const std::size_t n = s.u.size();
  rhs(s.u, k1_);
  if (cfg_.stepper == Stepper::Euler) {
    for (std::size_t i = 0; i < n; ++i) s.u[i] += dt_ * k1_[i];
  } else {
    // SSP RK2: u1 = u + dt L(u); u <- (u + u1 + dt L(u1)) / 2
    std::vector<double>& u1 = k2_;
    for (std::size_t i = 0; i < n; ++i) u1[i] = s.u[i] + dt_ * k1_[i];
    rhs(u1, k1_);
    for (std::size_t i = 0; i < n; ++i) s.u[i] = 0.5 * (s.u[i] + u1[i] + dt_ * k1_[i]);
  }
  s.t += dt_;
  ++s.steps;
  for (std::size_t i = 0; i < n; i += layer_) {
    if (!std::isfinite(s.u[i]) || std::abs(s.u[i]) > 1e6) {
      std::ostringstream os;
      os << "solution blew up at t = " << s.t << " with dt = " << dt_ << " (stability bound " << dt_max_ << ")";
      throw SimulationError(os.str());
    }
  }
}

double Simulator::front_position(const SimState& s) const {
  const int n1 = grid_.size(0);
  for (int i = 0; i + 1 < n1; ++i) {
    const double a = s.u[grid_.centerline(i)];
    const double b = s.u[grid_.centerline(i + 1)];
    if (a < 0.5 && b >= 0.5) return grid_.coord(0, i) + grid_.spacing(0) * (0.5 - a) / (b - a);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

FrontTrace run_and_classify(const SimConfig& cfg, const ExtendedNonlinearity& nl, const DriftField& d,
                            const CrossSection& cs, const WaveProfile& wave, const Supersolution* w,
                            const FrameCallback& on_frame) {
  const Simulator sim(cfg, nl, d, cs);
  const TruncatedGrid& g = sim.grid();
  SimState s = sim.initialize(wave);
  FrontTrace tr;
  tr.wave_speed = wave.speed();
  tr.dt = sim.dt();
  tr.min_u = std::numeric_limits<double>::infinity();
  tr.max_u = -tr.min_u;

  std::vector<double> bound;
  if (w != nullptr) {
    tr.comparison_checked = true;
    tr.comparison_gap = -std::numeric_limits<double>::infinity();
    bound.resize(g.node_count());
    for (std::size_t i = 0; i < g.node_count(); ++i) bound[i] = w->at(g.x1(i), g.y(i));
  }

  const auto record = [&] {
    const double xf = sim.front_position(s);
    if (std::isnan(xf)) {
      std::ostringstream os;
      os << "front not found on the centerline at t = " << s.t
         << "; it left the truncated domain, enlarge [X-, X+]";
      throw SimulationError(os.str());
    }
    tr.times.push_back(s.t);
    tr.positions.push_back(xf);
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      tr.min_u = std::min(tr.min_u, s.u[i]);
      tr.max_u = std::max(tr.max_u, s.u[i]);
      if (!bound.empty() && s.u[i] - bound[i] > tr.comparison_gap) {
        tr.comparison_gap = s.u[i] - bound[i];
        tr.comparison_time = s.t;
        tr.comparison_x1 = g.x1(i);
      }
    }
    if (on_frame) on_frame(s, g);
    return xf;
  };

  record();
  const long total = static_cast<long>(std::ceil((cfg.t_end - cfg.t0) / sim.dt() - 1e-9));
  for (long k = 1; k <= total; ++k) {
    sim.step(s);
    if (k % cfg.frame_stride == 0 || k == total) {
      const double xf = record();
      if (xf < cfg.x_minus + cfg.margin) {
        tr.stopped_early = k < total;
        break;
      }
    }
  }
  tr.steps = s.steps;
  if (!bound.empty()) tr.comparison_passed = tr.comparison_gap <= cfg.comparison_tol;

  const double c = wave.speed();
  const std::size_t n = tr.times.size();
  const double t_window = tr.times.back() - cfg.window_fraction * (tr.times.back() - tr.times.front());
  std::vector<double> wt, wx;
  double min_window_x = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (tr.times[i] < t_window) continue;
    wt.push_back(tr.times[i]);
    wx.push_back(tr.positions[i]);
    min_window_x = std::min(min_window_x, tr.positions[i]);
  }
  tr.late_velocity = least_squares_slope(wt, wx);

  const double threshold = -d.x0() - 3.0 * wave.width();
  std::vector<double> pt, px;
  for (std::size_t i = 0; i < n; ++i) {
    if (tr.positions[i] < threshold) {
      pt.push_back(tr.times[i]);
      px.push_back(tr.positions[i]);
    }
  }
  tr.propagation_samples = static_cast<int>(pt.size());
  tr.propagation_velocity = least_squares_slope(pt, px);

  if (wt.size() >= 2 && std::abs(tr.late_velocity) < cfg.stall_factor * c &&
      min_window_x > cfg.x_minus + cfg.margin) {
    tr.classification = Classification::Blocked;
  } else if (pt.size() >= 3 && std::abs(tr.propagation_velocity + c) <= cfg.speed_band * c) {
    tr.classification = Classification::Propagating;
  }
  return tr;
}

}  // namespace front_blocker
