#include "front_blocker/sobolev.hpp"

#include "front_blocker/error.hpp"

#include <Eigen/SparseCholesky>
#include <boost/math/tools/minima.hpp>

#include <cmath>

namespace front_blocker {

double estimate_C1(const CrossSection& cs, const SobolevEstimateOptions& options, int* iterations) {
  const double q = Exponents::d(exponents_for(cs.ambient_dim()).q);
  const auto grid = std::make_shared<const TruncatedGrid>(DriftField::zero(1.0), cs, 0.0, options.length,
                                                          options.resolution);
  const TruncatedGrid& g = *grid;
  const DiscreteField shape(grid, BoundaryTags{true, true, 0.0, 0.0});
  const FreeIndex fi = free_index(shape);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(weighted_gram(g, fi));
  if (ldlt.info() != Eigen::Success) throw InternalError("H^1 Gram matrix factorization failed");
  const auto m = g.mass();
  const auto nf = static_cast<Eigen::Index>(fi.nodes.size());

  // start from a bump on the lateral boundary, where maximizers concentrate
  Eigen::VectorXd w(nf);
  for (Eigen::Index k = 0; k < nf; ++k) {
    const std::size_t node = fi.nodes[static_cast<std::size_t>(k)];
    double r2 = std::pow(g.x1(node) - 0.5 * options.length, 2);
    for (double y : g.y(node)) r2 += y * y;
    w[k] = std::exp(-r2 / 0.1);
  }
  Eigen::SparseMatrix<double> M = weighted_gram(g, fi);
  const auto normalize = [&](Eigen::VectorXd& v) { v /= std::sqrt(v.dot(M * v)); };
  const auto quotient = [&](const Eigen::VectorXd& v) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < nf; ++k) s += m[fi.nodes[static_cast<std::size_t>(k)]] * std::pow(std::abs(v[k]), q);
    return std::pow(s, 1.0 / q) / std::sqrt(v.dot(M * v));
  };
  normalize(w);
  double best = quotient(w);
  int it = 0;
  Eigen::VectorXd b(nf);
  for (; it < options.max_iterations; ++it) {
    for (Eigen::Index k = 0; k < nf; ++k) {
      b[k] = m[fi.nodes[static_cast<std::size_t>(k)]] * std::pow(std::abs(w[k]), q - 2.0) * w[k];
    }
    w = ldlt.solve(b);
    normalize(w);
    const double next = quotient(w);
    const bool done = std::abs(next - best) <= options.tol * best;
    best = std::max(best, next);
    if (done) break;
  }
  if (iterations != nullptr) *iterations = it;
  return best;
}

double estimate_C2(const CrossSection& cs, double x0, const SobolevEstimateOptions& options) {
  if (!(x0 > 0.0)) throw ValidationError("slab width x0 must be positive");
  const auto ex = exponents_for(cs.ambient_dim());
  const double p = Exponents::d(ex.p);
  const double mexp = Exponents::d(ex.m);
  const TruncatedGrid g(DriftField::zero(x0), cs, -x0, 0.0, options.resolution);
  const auto vol = g.mass();

  const double measure = x0 * cs.measure();
  double best = std::pow(measure, 1.0 / mexp - 1.0 / p);  // constants

  double diam2 = x0 * x0;
  for (double L : cs.lengths()) diam2 += L * L;
  // Gaussian centered at the corner x1 = 0, y = 0 with width s
  const auto neg_quotient = [&](double log_s) {
    const double s2 = std::exp(2.0 * log_s);
    double lm = 0.0;
    double wp = 0.0;
    for (std::size_t node = 0; node < g.node_count(); ++node) {
      double r2 = g.x1(node) * g.x1(node);
      for (double y : g.y(node)) r2 += y * y;
      const double w = std::exp(-r2 / s2);
      const double grad = 2.0 * std::sqrt(r2) / s2 * w;
      lm += vol[node] * std::pow(w, mexp);
      wp += vol[node] * (std::pow(grad, p) + std::pow(w, p));
    }
    return -std::pow(lm, 1.0 / mexp) / std::pow(wp, 1.0 / p);
  };
  const double lo = std::log(2.0 * g.min_spacing());
  const double hi = std::log(2.0 * std::sqrt(diam2));
  const auto [arg, val] = boost::math::tools::brent_find_minima(neg_quotient, lo, hi, 30);
  (void)arg;
  return std::max(best, -val);
}

SobolevConstants estimate_sobolev_constants(const CrossSection& cs, double x0, const SobolevEstimateOptions& options) {
  SobolevConstants sc;
  sc.C1 = estimate_C1(cs, options);
  sc.C2 = estimate_C2(cs, x0, options);
  sc.provenance = SobolevConstants::Provenance::Estimated;
  return sc;
}

}  // namespace front_blocker
