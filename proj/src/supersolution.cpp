#include "front_blocker/supersolution.hpp"

#include "front_blocker/error.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <sstream>

namespace front_blocker {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string location(const TruncatedGrid& g, std::size_t node) {
  std::ostringstream os;
  os << "x1 = " << g.x1(node);
  const auto y = g.y(node);
  for (std::size_t i = 0; i < y.size(); ++i) os << ", y" << i + 1 << " = " << y[i];
  return os.str();
}

}  // namespace

DiscreteField reference_profile(std::shared_ptr<const TruncatedGrid> g) {
  const double a = g->x_hi();
  if (!(a > 0.0)) throw ValidationError("reference profile needs a grid ending at a > 0");
  DiscreteField w(g, BoundaryTags{});
  for (std::size_t i = 0; i < g->node_count(); ++i) {
    const double x = g->x1(i);
    w.values[i] = x <= 0.0 ? 0.0 : x / a;
  }
  return w.apply_tags();
}

double energy(const DiscreteField& w, const ExtendedNonlinearity& nl) {
  return energy(*w.grid, w.values, nl);
}

MinimizeResult minimize_constrained(std::shared_ptr<const TruncatedGrid> gp, const ExtendedNonlinearity& nl,
                                    double delta, const MinimizerConfig& cfg) {
  if (!(delta > 0.0)) throw ValidationError("ball radius delta must be positive");
  const TruncatedGrid& g = *gp;
  const DiscreteField w0 = reference_profile(gp);
  const FreeIndex fi = free_index(w0);
  const std::size_t n = g.node_count();
  const auto mass = g.mass();

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(weighted_gram(g, fi));
  if (ldlt.info() != Eigen::Success) throw InternalError("weighted Gram matrix factorization failed");

  std::vector<double> v(n);
  // radial projection toward w0; returns the distance after projection
  const auto project = [&](std::vector<double>& w) {
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] - w0.values[i];
    const double dist = std::sqrt(weighted_norm_sq(g, v));
    if (dist <= delta) return dist;
    const double s = delta / dist;
    for (std::size_t i = 0; i < n; ++i) w[i] = w0.values[i] + s * v[i];
    return delta;
  };
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(fi.nodes.size()));
  const auto sobolev_gradient = [&](const std::vector<double>& grad) {
    for (std::size_t k = 0; k < fi.nodes.size(); ++k) rhs[static_cast<Eigen::Index>(k)] = grad[fi.nodes[k]];
    const Eigen::VectorXd sol = ldlt.solve(rhs);
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < fi.nodes.size(); ++k) out[fi.nodes[k]] = sol[static_cast<Eigen::Index>(k)];
    return out;
  };
  const auto el_residual = [&](const std::vector<double>& grad) {
    double r = 0.0;
    for (std::size_t i : fi.nodes) r = std::max(r, std::abs(grad[i]) / mass[i]);
    return r;
  };

  MinimizeResult res;
  res.ball_radius_used = delta;
  res.energy_w0 = energy(g, w0.values, nl);

  std::vector<double> w = w0.values;
  double J = res.energy_w0;  // running value, advanced by accurate differences
  std::vector<double> grad = energy_gradient(g, w, nl);
  std::vector<double> G = sobolev_gradient(grad);
  double dist = 0.0;
  double lambda = cfg.initial_step;
  std::vector<double> trial(n), dir(n), diff(n);
  constexpr int kMemory = 10;  // nonmonotone reference window
  std::vector<double> history{J};

  int it = 0;
  for (;; ++it) {
    const bool active = dist >= delta * (1.0 - 1e-9);
    for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] - G[i];
    project(trial);
    for (std::size_t i = 0; i < n; ++i) diff[i] = w[i] - trial[i];
    res.projected_gradient = std::sqrt(weighted_norm_sq(g, diff));
    res.el_residual = el_residual(grad);
    res.constraint_active = active;
    if ((!active && res.el_residual < cfg.tol) || (active && res.projected_gradient < cfg.tol)) {
      res.converged = true;
      break;
    }
    if (it >= cfg.max_iterations) break;

    // spectral projected gradient: d = P(w - lambda G) - w, then backtrack on
    // w + t d against the largest of the last few energies
    for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] - lambda * G[i];
    project(trial);
    for (std::size_t i = 0; i < n; ++i) dir[i] = trial[i] - w[i];
    const double slope = dot(grad, dir);
    if (!(slope < 0.0)) {
      std::ostringstream os;
      os << "projected direction is not a descent direction at iteration " << it << " (slope " << slope
         << ", EL residual " << res.el_residual << ")";
      throw ConvergenceError(os.str());
    }
    const double J_ref = *std::max_element(history.begin(), history.end());
    double t = 1.0;
    double dJ = 0.0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] + t * dir[i];
      dJ = energy_difference(g, w, trial, nl);
      if (J + dJ <= J_ref + cfg.armijo * t * slope) break;
      // safeguarded quadratic interpolation of J along the segment
      const double t_q = -0.5 * slope * t * t / (dJ - slope * t);
      t = (t_q >= 0.1 * t && t_q <= 0.5 * t) ? t_q : 0.5 * t;
      if (t < 1e-14) {
        std::ostringstream os;
        os << "line search failed to decrease J at iteration " << it << ": J = " << J << ", last change " << dJ
           << ", EL residual = " << res.el_residual << ", projected gradient = " << res.projected_gradient
           << ", distance = " << dist << " of delta = " << delta;
        throw ConvergenceError(os.str());
      }
    }
    std::vector<double> grad_new = energy_gradient(g, trial, nl);
    std::vector<double> G_new = sobolev_gradient(grad_new);
    // Barzilai-Borwein in the Gram metric: <dw, dG>_M = dw . dgrad
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diff[i] = trial[i] - w[i];
      sy += diff[i] * (grad_new[i] - grad[i]);
    }
    const double ss = weighted_norm_sq(g, diff);
    lambda = sy > 0.0 ? std::clamp(ss / sy, 1e-8, 1e8) : 1e8;
    w.swap(trial);
    grad.swap(grad_new);
    G.swap(G_new);
    J += dJ;
    if (static_cast<int>(history.size()) == kMemory) history.erase(history.begin());
    history.push_back(J);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] - w0.values[i];
    dist = std::sqrt(weighted_norm_sq(g, v));
  }

  res.iterations = it;
  res.energy = energy(g, w, nl);
  for (std::size_t i = 0; i < n; ++i) v[i] = w[i] - w0.values[i];
  res.distance_to_w0 = std::sqrt(weighted_norm_sq(g, v));
  res.min_value = *std::min_element(w.begin(), w.end());
  res.max_value = *std::max_element(w.begin(), w.end());
  res.w = DiscreteField(gp, std::move(w), w0.tags);
  return res;
}

LemmaSample lemma_gap(const TruncatedGrid& g, std::span<const double> w, const ExtendedNonlinearity& nl,
                      double alpha) {
  const std::vector<double> zero(g.node_count(), 0.0);
  LemmaSample s;
  const double nsq = weighted_norm_sq(g, w);
  s.norm = std::sqrt(nsq);
  s.energy_gap = energy(g, w, nl) - energy(g, zero, nl);
  s.slack = s.energy_gap - alpha * nsq;
  double h = 0.0;
  for (int a = 0; a < g.dims(); ++a) h = std::max(h, g.spacing(a));
  s.allowance = h * h * nsq;
  return s;
}

LemmaGapReport lemma_gap_check(std::shared_ptr<const TruncatedGrid> gp, const ExtendedNonlinearity& nl,
                               double alpha, double delta, int samples, std::uint64_t seed) {
  if (samples < 1) throw ValidationError("lemma check needs at least one sample");
  if (!(delta > 0.0)) throw ValidationError("ball radius delta must be positive");
  const TruncatedGrid& g = *gp;
  const double R = g.x_lo();
  const double L = g.x_hi() - R;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double pi = std::numbers::pi;

  LemmaGapReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  std::vector<double> w(g.node_count());
  for (int s = 0; s < samples; ++s) {
    // sin((k - 1/2) pi (x - R)/L) vanishes at R and is flat at x = x_hi; cosines are Neumann in y
    const int kmax = 1 + static_cast<int>(unit(rng) * 6.0);
    struct Mode {
      int k;
      std::vector<int> l;
      double c;
    };
    std::vector<Mode> modes;
    for (int k = 1; k <= kmax; ++k) {
      for (int rep_l = 0; rep_l < 2; ++rep_l) {
        Mode m{k, std::vector<int>(g.dims() - 1), normal(rng) / k};
        for (auto& l : m.l) l = static_cast<int>(unit(rng) * 3.0);
        modes.push_back(std::move(m));
      }
    }
    const double bump_center = R + L * unit(rng);
    const double bump_width = 0.2 + unit(rng);
    const double bump_amp = normal(rng);
    for (std::size_t node = 0; node < g.node_count(); ++node) {
      const double x = g.x1(node);
      const auto y = g.y(node);
      double val = 0.0;
      for (const auto& m : modes) {
        double term = m.c * std::sin((m.k - 0.5) * pi * (x - R) / L);
        for (std::size_t i = 0; i < y.size(); ++i) {
          term *= std::cos(m.l[i] * pi * y[i] / g.cross_section().lengths()[i]);
        }
        val += term;
      }
      const double z = (x - bump_center) / bump_width;
      val += bump_amp * std::exp(-z * z) * (1.0 - std::exp(-(x - R)));
      w[node] = g.index(node, 0) == 0 ? 0.0 : val;
    }
    const double target = delta * (s + 1) / samples;
    const double nrm = std::sqrt(weighted_norm_sq(g, w));
    for (double& x : w) x *= target / nrm;
    const LemmaSample ls = lemma_gap(g, w, nl, alpha);
    rep.samples.push_back(ls);
    if (ls.slack < rep.min_slack) {
      rep.min_slack = ls.slack;
      rep.worst_sample = s;
    }
    if (ls.slack < -ls.allowance) {
      rep.passed = false;
      std::ostringstream os;
      os << "quadratic lower bound violated by sample " << s << ": ||w|| = " << ls.norm
         << ", J(w) - J(0) = " << ls.energy_gap << ", alpha ||w||^2 = " << alpha * ls.norm * ls.norm
         << ", slack = " << ls.slack << " below allowance " << -ls.allowance;
      throw CertificateError(os.str());
    }
  }
  return rep;
}

StabilizeResult stabilize_in_R(const DriftField& d, const CrossSection& cs, const ExtendedNonlinearity& nl,
                               double delta, double a, double h1, const std::vector<int>& cross,
                               const std::vector<double>& R_sequence, const MinimizerConfig& cfg) {
  if (R_sequence.size() < 2) throw ValidationError("stabilization needs at least two truncations");
  for (std::size_t i = 1; i < R_sequence.size(); ++i) {
    if (!(R_sequence[i] < R_sequence[i - 1])) throw ValidationError("R sequence must be strictly decreasing");
  }
  std::vector<std::future<MinimizeResult>> jobs;
  StabilizeResult out;
  for (double R : R_sequence) {
    auto grid = std::make_shared<const TruncatedGrid>(TruncatedGrid::anchored(d, cs, R, a, h1, cross));
    out.R_used.push_back(grid->x_lo());
    jobs.push_back(std::async(std::launch::async, [grid, &nl, delta, cfg] {
      return minimize_constrained(grid, nl, delta, cfg);
    }));
  }
  for (auto& j : jobs) out.runs.push_back(j.get());

  for (std::size_t r = 1; r < out.runs.size(); ++r) {
    const auto& prev = out.runs[r - 1].w;
    const auto& next = out.runs[r].w;
    // anchored at a: node i of prev coincides with node i + offset of next
    const std::size_t offset = static_cast<std::size_t>(next.grid->size(0) - prev.grid->size(0)) * next.grid->stride(0);
    double gap = 0.0;
    for (std::size_t i = 0; i < prev.values.size(); ++i) {
      gap = std::max(gap, std::abs(prev.values[i] - next.values[i + offset]));
    }
    out.cauchy_gaps.push_back(gap);
  }
  for (std::size_t i = 1; i < out.cauchy_gaps.size(); ++i) {
    if (!(out.cauchy_gaps[i] < out.cauchy_gaps[i - 1])) out.gaps_decreasing = false;
  }
  if (!out.gaps_decreasing) out.warning = "Cauchy gaps in R are not strictly decreasing";
  return out;
}

Supersolution::Supersolution(DiscreteField w, double residual, double junction_slope, double min_value,
                             double max_value)
    : w_(std::move(w)), residual_(residual), slope_(junction_slope), min_(min_value), max_(max_value) {}

double Supersolution::at(double x1, std::span<const double> y) const {
  if (x1 > a()) return 1.0;
  return w_.at(x1, y);
}

Supersolution extend_and_certify(const DiscreteField& w_inf, const ExtendedNonlinearity& nl, double tol) {
  const TruncatedGrid& g = *w_inf.grid;
  if (nl.f(1.0) != 0.0) throw CertificateError("extension by 1 is not stationary: f(1) != 0");
  const auto r = el_residual_field(g, w_inf.values, nl);
  double residual = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (w_inf.is_fixed(i)) continue;
    if (std::abs(r[i]) > residual) residual = std::abs(r[i]);
    if (std::abs(r[i]) > tol) {
      std::ostringstream os;
      os << "interior EL residual " << r[i] << " exceeds " << tol << " at " << location(g, i);
      throw CertificateError(os.str());
    }
  }
  const int last = g.size(0) - 1;
  const std::size_t layer = g.stride(0);
  double slope = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < layer; ++j) {
    const std::size_t node = static_cast<std::size_t>(last) * layer + j;
    const double s = (w_inf.values[node] - w_inf.values[node - layer]) / g.spacing(0);
    slope = std::min(slope, s);
    if (s < -tol) {
      std::ostringstream os;
      os << "axial slope " << s << " at the junction is negative at " << location(g, node);
      throw CertificateError(os.str());
    }
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const double v = w_inf.values[i];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (v < -1e-12 || v > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "value " << v << " outside [0, 1] at " << location(g, i);
      throw CertificateError(os.str());
    }
  }
  return Supersolution(w_inf, residual, slope, lo, hi);
}

}  // namespace front_blocker
