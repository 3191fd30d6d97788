#pragma once

#include "front_blocker/criterion.hpp"
#include "front_blocker/report.hpp"
#include "front_blocker/scenario.hpp"
#include "front_blocker/simulator.hpp"
#include "front_blocker/supersolution.hpp"
#include "front_blocker/traveling_wave.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace front_blocker {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int certificate_failure = 1;
inline constexpr int criterion_unsatisfied = 2;
inline constexpr int usage = 64;
}  // namespace exit_code

/// Inputs resolved from a scenario and the criterion evaluated on them.
struct CriterionRun {
  ExtendedNonlinearity nl;
  NonlinearityConstants nc;
  CrossSection cs;
  DriftField drift;
  Exponents exponents;
  SobolevConstants sobolev;
  DriftSummary summary;
  CriterionReport report;
  HomogeneityAudit audit;
  std::optional<ConcentratedReport> concentrated;  ///< Concentrated drifts only

  double a() const { return report.a_used; }
  double delta() const { return report.delta; }
};

CriterionRun run_criterion(const Scenario& s);

/// Minimizers over the scenario's R sequence on grids anchored at a with
/// spacing (a - min R) / (axial_nodes - 1), then the extension certificate.
struct MinimizeRun {
  StabilizeResult stabilize;
  std::shared_ptr<const Supersolution> supersolution;  ///< null if certification threw
  std::string certificate_error;
  bool energy_decreased = false;  ///< J(w) <= J(w0) on the longest truncation
  /// converged, interior, J(w) <= J(w0) and the extension certificate passed
  bool passed = false;
};

MinimizeRun run_minimize(const Scenario& s, const CriterionRun& c);

FrontTrace run_simulation(const Scenario& s, const CriterionRun& c, const WaveProfile& wave,
                          const Supersolution* w = nullptr, const FrameCallback& on_frame = {});

enum class SweepParam { C, Eps, Theta, N };

SweepParam parse_sweep_param(const std::string& name);
std::string to_string(SweepParam p);

/// Copy of `s` with the swept parameter set to `value`. Throws ConfigError if
/// the scenario family has no such parameter.
Scenario with_param(const Scenario& s, SweepParam p, double value);

struct SweepPoint {
  double value = 0.0;
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double delta = 0.0;
  std::string classification = "skipped";  ///< Blocked | Propagating | Undetermined | skipped | error
  double late_velocity = 0.0;
  std::string error;
};

struct SweepResult {
  SweepParam param = SweepParam::C;
  std::vector<SweepPoint> points;
  /// Changes of `satisfied` along increasing parameter value.
  int transitions = 0;
  /// At most one change, and it goes from false to true.
  bool monotone = true;
};

/// Evaluates every point on a pool of `threads` workers; with `simulate` each
/// point also runs the simulator from the traveling-wave datum. Points are
/// returned in parameter order whatever the completion order.
SweepResult run_sweep(const Scenario& s, SweepParam p, const std::vector<double>& values, bool simulate,
                      unsigned threads);

/// Worker count: FRONT_BLOCKER_THREADS if set and positive, else the hardware
/// concurrency, never more than `jobs`.
unsigned worker_threads(std::size_t jobs);

/// Parses argv (argv[0] is the program name) and runs one subcommand among
/// wave, criterion, minimize, simulate, sweep, verify. Returns the process
/// exit code; messages go to `out` and diagnostics to `err`.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_subcommand(int argc, char** argv);

}  // namespace front_blocker
