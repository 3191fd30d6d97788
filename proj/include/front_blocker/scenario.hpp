#pragma once

#include "front_blocker/criterion.hpp"
#include "front_blocker/drift_weight.hpp"
#include "front_blocker/nonlinearity.hpp"
#include "front_blocker/simulator.hpp"
#include "front_blocker/supersolution.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace front_blocker {

/// Declarative description of a run. Every field has a default here and
/// every resolved value is echoed into the emitted reports.
struct Scenario {
  struct Nonlinearity {
    std::string kind = "cubic";  ///< cubic | tabulated
    double theta = 0.25;
    std::string path;            ///< CSV (u, f) for tabulated
    bool skip_positive_mass_check = false;
  } nonlinearity;

  struct Geometry {
    std::vector<double> lengths{0.5, 0.5};
    double lipschitz_norm = 0.0;
  } cross_section;

  struct Drift {
    std::string kind = "concentrated";  ///< concentrated | zero | axial_bump | grid
    double eps = 0.5;
    double C = 5.0;
    double x0 = 1.0;                    ///< zero drift support width
    std::vector<double> x;              ///< axial_bump knots
    std::vector<double> g;              ///< axial_bump values
    std::string path;                   ///< axial_bump or grid CSV
    double gauge = 0.0;
  } drift;

  struct Criterion {
    std::string form = "prop";          ///< prop | theorem
    bool optimize_a = false;
    double a = 0.0;                     ///< 0 selects the closed-form minimizer of nu gamma + beta
    double a_lo = 0.1;
    double a_hi = 50.0;
    std::string sobolev = "configured"; ///< configured | estimated
    double C1 = 1.0;
    double C2 = 1.0;
  } criterion;

  struct Minimizer {
    std::vector<double> R{-6.0, -10.0, -14.0};
    int axial_nodes = 128;              ///< nodes on the longest truncation [min R, a]
    std::vector<int> cross_nodes{8, 8};
    double tol = 1e-8;
    int max_iterations = 20000;
    double certify_tol = 1e-5;
  } minimizer;

  struct Simulation {
    double x_minus = 0.0;               ///< 0 selects -x0 - 45
    double x_plus = 0.0;                ///< 0 selects a + 30
    double h = 0.1;                     ///< axial spacing
    std::vector<int> cross_nodes{3, 3};
    double front_start = 0.0;           ///< initial front position; 0 selects a + 12
    double t_end = 100.0;
    double dt = 0.0;
    int frame_stride = 200;
    std::string stepper = "euler";      ///< euler | rk2
    std::string advection = "fitted";   ///< fitted | upwind | centered
    double window_fraction = 0.25;
    double stall_factor = 0.05;
    double speed_band = 0.25;
    double margin = 3.0;
    double comparison_tol = 1e-3;
  } simulator;

  struct Output {
    std::string dir = "out";
    unsigned long long seed = 1;
  } output;

  /// Directory that relative file names resolve against.
  std::filesystem::path base_dir;

  int n() const { return static_cast<int>(cross_section.lengths.size()) + 1; }
};

/// Parses TOML text; unknown sections or keys, wrong types and invalid
/// values raise ConfigError carrying the source line.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

ExtendedNonlinearity build_nonlinearity(const Scenario& s);
CrossSection build_cross_section(const Scenario& s);
DriftField build_drift(const Scenario& s);
CriterionForm build_form(const Scenario& s);
MinimizerConfig build_minimizer_config(const Scenario& s);
/// Resolves the simulator defaults that depend on a, the support width x0
/// and the wave speed; the front starts at front_start (a + 12 if unset).
SimConfig build_sim_config(const Scenario& s, double a, double wave_speed, double x0);

}  // namespace front_blocker
