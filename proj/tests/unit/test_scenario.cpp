#include <doctest.h>

#include "front_blocker/error.hpp"
#include "front_blocker/report.hpp"
#include "front_blocker/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace front_blocker;

namespace {

int error_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("front_blocker_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("empty text yields the centralized defaults") {
  const Scenario s = parse_scenario("");
  const Scenario d{};
  CHECK(to_json(s) == to_json(d));
  CHECK(s.n() == 3);
  CHECK(s.nonlinearity.theta == 0.25);
  CHECK(s.drift.kind == "concentrated");
  CHECK(s.minimizer.R == std::vector<double>{-6.0, -10.0, -14.0});
  CHECK(s.simulator.advection == "fitted");
}

TEST_CASE("every section is read") {
  const Scenario s = parse_scenario(R"(
[nonlinearity]
kind = "cubic"
theta = 0.3

[cross_section]
lengths = [1, 0.5, 0.25]

[drift]
kind = "concentrated"
eps = 0.25
C = 3
gauge = 7.3

[criterion]
form = "theorem"
optimize_a = true
a_lo = 0.5
a_hi = 20.0
C1 = 0.1
C2 = 0.2

[minimizer]
R = [-5.0, -9.0]
axial_nodes = 64
cross_nodes = [4, 4, 4]
certify_tol = 1e-6

[simulator]
h = 0.2
cross_nodes = [3, 3, 3]
stepper = "rk2"
advection = "upwind"
t_end = 50

[output]
dir = "results"
seed = 42
)");
  CHECK(s.nonlinearity.theta == 0.3);
  CHECK(s.n() == 4);
  CHECK(s.drift.C == 3.0);
  CHECK(s.drift.gauge == 7.3);
  CHECK(s.criterion.form == "theorem");
  CHECK(s.criterion.optimize_a);
  CHECK(s.criterion.C2 == 0.2);
  CHECK(s.minimizer.R.size() == 2u);
  CHECK(s.minimizer.certify_tol == 1e-6);
  CHECK(s.simulator.stepper == "rk2");
  CHECK(s.simulator.t_end == 50.0);
  CHECK(s.output.seed == 42u);
  CHECK(build_form(s) == CriterionForm::TheoremForm);
  CHECK(build_cross_section(s).ambient_dim() == 4);
  CHECK(build_drift(s).gauge() == 7.3);
  const auto cfg = build_sim_config(s, 3.0, 0.5, 0.25);
  CHECK(cfg.stepper == Stepper::RK2);
  CHECK(cfg.advection == Advection::Upwind);
  CHECK(cfg.x_minus == -45.25);
  CHECK(cfg.x_plus == 33.0);
  CHECK(cfg.t0 == doctest::Approx(-15.0 / 0.5));
  CHECK(cfg.n_axial == static_cast<int>(std::lround((33.0 + 45.25) / 0.2)) + 1);
}

TEST_CASE("inline table form of a section") {
  const Scenario s = parse_scenario(R"(nonlinearity = { kind = "cubic", theta = 0.1 })");
  CHECK(s.nonlinearity.theta == 0.1);
  CHECK(build_nonlinearity(s).theta() == 0.1);
}

TEST_CASE("diagnostics are anchored at the offending line") {
  CHECK(error_line("[drift]\nkind = \"concentrated\"\nbogus = 1\n") == 3);
  CHECK(error_line("[nonlinearity]\n\ntheta = \"high\"\n") == 3);
  CHECK(error_line("[output]\ndir = \"x\"\n[extras]\nk = 1\n") == 3);
  CHECK(error_line("[drift]\nkind = \"spiral\"\n") == 2);
  CHECK(error_line("[cross_section]\nlengths = [0.5]\n") == 2);
  CHECK(error_line("[criterion]\nC1 = -1.0\n") == 2);
  CHECK(error_line("[minimizer]\ncross_nodes = [4, 4.5]\n") == 2);
  CHECK(error_line("[simulator]\nh = 0.1\n\nh = 0.2\n") == 4);  // duplicate key: TOML parse error
  CHECK(error_line("[nonlinearity]\nkind = \"tabulated\"\n") > 0);
  CHECK_THROWS_WITH_AS(parse_scenario("\n\n[drift]\nmystery = 2\n"), doctest::Contains("line 4"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_scenario("[cross_section]\nlengths = [0.5, 0.5, 0.5]\n"),
                       doctest::Contains("cross_nodes"), ConfigError);
}

TEST_CASE("relative data paths resolve against the scenario file") {
  const auto dir = temp_dir("scenario_paths");
  {
    std::ofstream f(dir / "f.csv");
    f << "u,f\n";
    for (int i = 0; i <= 200; ++i) {
      const double u = i / 200.0;
      f << u << ',' << u * (1 - u) * (u - 0.3) << '\n';
    }
  }
  {
    std::ofstream f(dir / "s.toml");
    f << "[nonlinearity]\nkind = \"tabulated\"\npath = \"f.csv\"\n";
  }
  const Scenario s = load_scenario(dir / "s.toml");
  CHECK(s.base_dir == dir);
  CHECK(build_nonlinearity(s).theta() == doctest::Approx(0.3).epsilon(1e-6));
  CHECK_THROWS_AS(load_scenario(dir / "missing.toml"), ConfigError);
}

TEST_CASE("reports are deterministic and round-trip doubles") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::strtod(format_double(M_PI).c_str(), nullptr) == M_PI);
  const Scenario s{};
  CHECK(to_json(s).dump() == to_json(s).dump());
  const auto j = to_json(s);
  CHECK(j["simulator"]["comparison_tol"] == 1e-3);
  CHECK(j["minimizer"]["axial_nodes"] == 128);

  const auto dir = temp_dir("report");
  write_json(dir / "a.json", j);
  write_json(dir / "b.json", to_json(Scenario{}));
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(Json::parse(slurp(dir / "a.json")) == j);

  write_csv(dir / "t.csv", {"t", "x"}, {{0.0, 0.5}, {1.0, 2.0}});
  CHECK(slurp(dir / "t.csv") == "t,x\n0,1\n0.5,2\n");
  write_dat(dir / "t.dat", {"t", "x"}, {{0.0, 0.5}, {1.0, 2.0}});
  CHECK(slurp(dir / "t.dat") == "# t x\n0 1\n0.5 2\n");
  CHECK_THROWS_AS(write_csv(dir / "bad.csv", {"t"}, {{0.0}, {1.0}}), InternalError);
}

TEST_CASE("exponents serialize as exact fractions") {
  const auto j = to_json(exponents_for(3));
  CHECK(j["q"] == "6");
  CHECK(j["p"] == "8/5");
  CHECK(j["m"] == "3");
  CHECK(j["j"] == "8");
}
