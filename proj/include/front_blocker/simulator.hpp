#pragma once

#include "front_blocker/drift_weight.hpp"
#include "front_blocker/grid.hpp"
#include "front_blocker/nonlinearity.hpp"
#include "front_blocker/supersolution.hpp"
#include "front_blocker/traveling_wave.hpp"

#include <functional>
#include <string>
#include <vector>

namespace front_blocker {

enum class Stepper { Euler, RK2 };
/// Discretization of -k . grad u: one-sided upwind differences, centered
/// differences, or the exponentially fitted flux form (1/psi) div(psi grad u),
/// which is the operator whose stationary points the minimizer computes.
enum class Advection { Upwind, Centered, Fitted };
enum class Classification { Blocked, Propagating, Undetermined };

std::string to_string(Stepper s);
std::string to_string(Advection a);
std::string to_string(Classification c);

struct SimConfig {
  double x_minus = -30.0;
  double x_plus = 30.0;
  int n_axial = 601;
  std::vector<int> n_cross{3, 3};
  double dt = 0.0;          ///< 0 selects 0.9 dt_max
  double t0 = -40.0;        ///< initial front at x1 = -c t0
  double t_end = 100.0;
  int frame_stride = 200;   ///< steps between recorded frames
  Stepper stepper = Stepper::Euler;
  Advection advection = Advection::Fitted;
  double window_fraction = 0.25;  ///< late window for the stall test
  double stall_factor = 0.05;     ///< Blocked if |velocity| < stall_factor c
  double speed_band = 0.25;       ///< Propagating if |velocity + c| <= speed_band c
  double margin = 3.0;            ///< distance to X- treated as leaving the domain
  double comparison_tol = 1e-3;
};

struct SimState {
  double t = 0.0;
  long steps = 0;
  std::vector<double> u;
};

struct FrontTrace {
  std::vector<double> times;
  std::vector<double> positions;
  Classification classification = Classification::Undetermined;
  double late_velocity = 0.0;         ///< least squares over the late window
  double propagation_velocity = 0.0;  ///< least squares over samples past -x0 - 3 widths (0 if none)
  int propagation_samples = 0;
  double wave_speed = 0.0;
  double dt = 0.0;
  long steps = 0;
  bool stopped_early = false;  ///< front reached X- + margin before t_end
  double min_u = 0.0;
  double max_u = 0.0;
  bool comparison_checked = false;
  double comparison_gap = 0.0;  ///< max over frames and nodes of u - w~
  double comparison_time = 0.0;
  double comparison_x1 = 0.0;
  bool comparison_passed = true;
};

class Simulator {
 public:
  Simulator(const SimConfig& cfg, const ExtendedNonlinearity& nl, const DriftField& d, const CrossSection& cs);

  const TruncatedGrid& grid() const noexcept { return grid_; }
  const SimConfig& config() const noexcept { return cfg_; }
  double dt() const noexcept { return dt_; }
  /// h^2 / (2 n (1 + h max|k| / 2)) with h the smallest spacing (fitted
  /// form: the positivity bound of its flux coefficients).
  double dt_max() const noexcept { return dt_max_; }

  /// u(t0, x) = phi(x1 + c t0) with the axial ends clamped to 0 and 1.
  /// Throws ConfigError if the front starts inside or left of the drift
  /// support, ValidationError if the tails are not resolved at X-/X+.
  SimState initialize(const WaveProfile& wave) const;
  void step(SimState& s) const;
  /// x1 where the centerline crosses 1/2 (first crossing from the left);
  /// NaN if it does not.
  double front_position(const SimState& s) const;

 private:
  void rhs(const std::vector<double>& u, std::vector<double>& out) const;

  SimConfig cfg_;
  ExtendedNonlinearity nl_;
  TruncatedGrid grid_;
  double dt_ = 0.0;
  double dt_max_ = 0.0;
  std::size_t layer_ = 0;
  std::vector<std::vector<long>> off_minus_;  // lateral offsets with reflection, per axis, per layer node
  std::vector<std::vector<long>> off_plus_;
  std::vector<double> sum_kappa_;             // fitted form: sum of incident edge coefficients
  mutable std::vector<double> k1_, k2_;
};

using FrameCallback = std::function<void(const SimState&, const TruncatedGrid&)>;

/// Integrates from t0 to t_end and classifies the front: Blocked if the late
/// velocity is below stall_factor c while staying right of X- + margin;
/// Propagating if the velocity after passing -x0 by three wave widths is
/// within speed_band c of -c; Undetermined otherwise. With a supersolution
/// the largest u - w~ over frames is recorded against comparison_tol.
/// Throws SimulationError if the front cannot be located.
FrontTrace run_and_classify(const SimConfig& cfg, const ExtendedNonlinearity& nl, const DriftField& d,
                            const CrossSection& cs, const WaveProfile& wave, const Supersolution* w = nullptr,
                            const FrameCallback& on_frame = {});

/// Least-squares slope of y against t.
double least_squares_slope(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace front_blocker
