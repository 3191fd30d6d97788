#include "front_blocker/scenario.hpp"

#include "front_blocker/error.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace front_blocker {

namespace {

int line_of(const toml::node& n) { return static_cast<int>(n.source().begin.line); }

// Typed access to one table; every key read is recorded so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const toml::table& t, std::string name) : t_(t), name_(std::move(name)) {}

  void number(const char* key, double& out) {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    if (auto v = n->value_exact<double>()) {
      out = *v;
    } else if (auto i = n->value_exact<int64_t>()) {
      out = static_cast<double>(*i);
    } else {
      throw ConfigError(qualified(key) + " must be a number", line_of(*n));
    }
    if (!std::isfinite(out)) throw ConfigError(qualified(key) + " must be finite", line_of(*n));
  }

  void integer(const char* key, int& out) {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    auto i = n->value_exact<int64_t>();
    if (!i) throw ConfigError(qualified(key) + " must be an integer", line_of(*n));
    out = static_cast<int>(*i);
  }

  void unsigned_integer(const char* key, unsigned long long& out) {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    auto i = n->value_exact<int64_t>();
    if (!i || *i < 0) throw ConfigError(qualified(key) + " must be a non-negative integer", line_of(*n));
    out = static_cast<unsigned long long>(*i);
  }

  void boolean(const char* key, bool& out) {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    auto b = n->value_exact<bool>();
    if (!b) throw ConfigError(qualified(key) + " must be a boolean", line_of(*n));
    out = *b;
  }

  void string(const char* key, std::string& out, std::initializer_list<const char*> allowed = {}) {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    auto s = n->value_exact<std::string>();
    if (!s) throw ConfigError(qualified(key) + " must be a string", line_of(*n));
    if (allowed.size() > 0 &&
        std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return *s == a; })) {
      std::string list;
      for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      throw ConfigError(qualified(key) + " = \"" + *s + "\" is not one of: " + list, line_of(*n));
    }
    out = *s;
  }

  void numbers(const char* key, std::vector<double>& out) {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    const toml::array* arr = n->as_array();
    if (arr == nullptr) throw ConfigError(qualified(key) + " must be an array of numbers", line_of(*n));
    std::vector<double> v;
    for (const toml::node& e : *arr) {
      if (auto d = e.value_exact<double>()) {
        v.push_back(*d);
      } else if (auto i = e.value_exact<int64_t>()) {
        v.push_back(static_cast<double>(*i));
      } else {
        throw ConfigError(qualified(key) + " must contain only numbers", line_of(e));
      }
    }
    out = std::move(v);
  }

  void integers(const char* key, std::vector<int>& out) {
    const toml::node* n = find(key);
    if (n == nullptr) return;
    const toml::array* arr = n->as_array();
    if (arr == nullptr) throw ConfigError(qualified(key) + " must be an array of integers", line_of(*n));
    std::vector<int> v;
    for (const toml::node& e : *arr) {
      auto i = e.value_exact<int64_t>();
      if (!i) throw ConfigError(qualified(key) + " must contain only integers", line_of(e));
      v.push_back(static_cast<int>(*i));
    }
    out = std::move(v);
  }

  /// Line of `key` if present, else of the table itself.
  int line(const char* key) const {
    const toml::node* n = t_.get(key);
    return n != nullptr ? line_of(*n) : line_of(t_);
  }

  void reject_unknown() const {
    for (const auto& [k, v] : t_) {
      if (std::find(seen_.begin(), seen_.end(), std::string(k.str())) == seen_.end()) {
        throw ConfigError("unknown key '" + qualified(std::string(k.str())) + "'", line_of(v));
      }
    }
  }

 private:
  const toml::node* find(const char* key) {
    seen_.emplace_back(key);
    return t_.get(key);
  }
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  const toml::table& t_;
  std::string name_;
  std::vector<std::string> seen_;
};

void require(bool ok, const std::string& what, int line) {
  if (!ok) throw ConfigError(what, line);
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string(e.description()), static_cast<int>(e.source().begin.line));
  }

  Scenario s;
  s.base_dir = base_dir;
  static const char* const kSections[] = {"nonlinearity", "cross_section", "drift",  "criterion",
                                          "minimizer",    "simulator",     "output"};
  for (const auto& [k, v] : root) {
    const std::string key(k.str());
    if (std::find(std::begin(kSections), std::end(kSections), key) == std::end(kSections)) {
      throw ConfigError("unknown section '" + key + "'", line_of(v));
    }
    if (!v.is_table()) throw ConfigError("'" + key + "' must be a table", line_of(v));
  }
  const auto section = [&](const char* name) -> const toml::table* { return root[name].as_table(); };

  if (const toml::table* t = section("nonlinearity")) {
    Section r(*t, "nonlinearity");
    auto& c = s.nonlinearity;
    r.string("kind", c.kind, {"cubic", "tabulated"});
    r.number("theta", c.theta);
    r.string("path", c.path);
    r.boolean("skip_positive_mass_check", c.skip_positive_mass_check);
    r.reject_unknown();
    if (c.kind == "cubic") {
      require(c.theta > 0.0 && c.theta < 1.0, "nonlinearity.theta must lie in (0, 1)", r.line("theta"));
    } else {
      require(!c.path.empty(), "nonlinearity.path is required for kind = \"tabulated\"", r.line("path"));
    }
  }

  if (const toml::table* t = section("cross_section")) {
    Section r(*t, "cross_section");
    auto& c = s.cross_section;
    r.numbers("lengths", c.lengths);
    r.number("lipschitz_norm", c.lipschitz_norm);
    r.reject_unknown();
    require(c.lengths.size() >= 2, "cross_section.lengths needs at least 2 entries (n >= 3)", r.line("lengths"));
    for (double L : c.lengths) require(L > 0.0, "cross_section.lengths must be positive", r.line("lengths"));
  }

  if (const toml::table* t = section("drift")) {
    Section r(*t, "drift");
    auto& c = s.drift;
    r.string("kind", c.kind, {"concentrated", "zero", "axial_bump", "grid"});
    r.number("eps", c.eps);
    r.number("C", c.C);
    r.number("x0", c.x0);
    r.numbers("x", c.x);
    r.numbers("g", c.g);
    r.string("path", c.path);
    r.number("gauge", c.gauge);
    r.reject_unknown();
    if (c.kind == "concentrated") {
      require(c.eps > 0.0, "drift.eps must be positive", r.line("eps"));
      require(c.C >= 0.0, "drift.C must be non-negative", r.line("C"));
    } else if (c.kind == "zero") {
      require(c.x0 > 0.0, "drift.x0 must be positive", r.line("x0"));
    } else if (c.kind == "axial_bump") {
      require(!c.path.empty() || (c.x.size() >= 2 && c.x.size() == c.g.size()),
              "drift.x and drift.g must have equal length >= 2 (or give drift.path)", r.line("x"));
    } else {
      require(!c.path.empty(), "drift.path is required for kind = \"grid\"", r.line("path"));
    }
  }

  if (const toml::table* t = section("criterion")) {
    Section r(*t, "criterion");
    auto& c = s.criterion;
    r.string("form", c.form, {"prop", "theorem"});
    r.boolean("optimize_a", c.optimize_a);
    r.number("a", c.a);
    r.number("a_lo", c.a_lo);
    r.number("a_hi", c.a_hi);
    r.string("sobolev", c.sobolev, {"configured", "estimated"});
    r.number("C1", c.C1);
    r.number("C2", c.C2);
    r.reject_unknown();
    require(c.a >= 0.0, "criterion.a must be non-negative (0 selects the closed form)", r.line("a"));
    require(c.a_lo > 0.0 && c.a_hi > c.a_lo, "criterion.a_lo/a_hi must satisfy 0 < a_lo < a_hi", r.line("a_lo"));
    require(c.C1 > 0.0, "criterion.C1 must be positive", r.line("C1"));
    require(c.C2 > 0.0, "criterion.C2 must be positive", r.line("C2"));
  }

  if (const toml::table* t = section("minimizer")) {
    Section r(*t, "minimizer");
    auto& c = s.minimizer;
    r.numbers("R", c.R);
    r.integer("axial_nodes", c.axial_nodes);
    r.integers("cross_nodes", c.cross_nodes);
    r.number("tol", c.tol);
    r.integer("max_iterations", c.max_iterations);
    r.number("certify_tol", c.certify_tol);
    r.reject_unknown();
    require(!c.R.empty(), "minimizer.R must not be empty", r.line("R"));
    require(c.axial_nodes >= 4, "minimizer.axial_nodes must be >= 4", r.line("axial_nodes"));
    for (int k : c.cross_nodes) require(k >= 2, "minimizer.cross_nodes must be >= 2", r.line("cross_nodes"));
    require(c.tol > 0.0, "minimizer.tol must be positive", r.line("tol"));
    require(c.max_iterations > 0, "minimizer.max_iterations must be positive", r.line("max_iterations"));
    require(c.certify_tol > 0.0, "minimizer.certify_tol must be positive", r.line("certify_tol"));
  }

  if (const toml::table* t = section("simulator")) {
    Section r(*t, "simulator");
    auto& c = s.simulator;
    r.number("x_minus", c.x_minus);
    r.number("x_plus", c.x_plus);
    r.number("h", c.h);
    r.integers("cross_nodes", c.cross_nodes);
    r.number("front_start", c.front_start);
    r.number("t_end", c.t_end);
    r.number("dt", c.dt);
    r.integer("frame_stride", c.frame_stride);
    r.string("stepper", c.stepper, {"euler", "rk2"});
    r.string("advection", c.advection, {"fitted", "upwind", "centered"});
    r.number("window_fraction", c.window_fraction);
    r.number("stall_factor", c.stall_factor);
    r.number("speed_band", c.speed_band);
    r.number("margin", c.margin);
    r.number("comparison_tol", c.comparison_tol);
    r.reject_unknown();
    require(c.h > 0.0, "simulator.h must be positive", r.line("h"));
    for (int k : c.cross_nodes) require(k >= 2, "simulator.cross_nodes must be >= 2", r.line("cross_nodes"));
    require(c.t_end > 0.0, "simulator.t_end must be positive", r.line("t_end"));
    require(c.dt >= 0.0, "simulator.dt must be non-negative (0 selects 0.9 dt_max)", r.line("dt"));
    require(c.frame_stride > 0, "simulator.frame_stride must be positive", r.line("frame_stride"));
    require(c.window_fraction > 0.0 && c.window_fraction <= 1.0, "simulator.window_fraction must lie in (0, 1]",
            r.line("window_fraction"));
  }

  if (const toml::table* t = section("output")) {
    Section r(*t, "output");
    r.string("dir", s.output.dir);
    r.unsigned_integer("seed", s.output.seed);
    r.reject_unknown();
  }

  // cross-section arrays must match the cross-section dimension
  const int line_cs = section("cross_section") ? line_of(*section("cross_section")) : 0;
  if (s.minimizer.cross_nodes.size() != s.cross_section.lengths.size()) {
    throw ConfigError("minimizer.cross_nodes must have one entry per cross_section length",
                      section("minimizer") ? Section(*section("minimizer"), "minimizer").line("cross_nodes") : line_cs);
  }
  if (s.simulator.cross_nodes.size() != s.cross_section.lengths.size()) {
    throw ConfigError("simulator.cross_nodes must have one entry per cross_section length",
                      section("simulator") ? Section(*section("simulator"), "simulator").line("cross_nodes") : line_cs);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

namespace {

std::filesystem::path resolve(const Scenario& s, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : s.base_dir / path;
}

}  // namespace

ExtendedNonlinearity build_nonlinearity(const Scenario& s) {
  const auto checks = s.nonlinearity.skip_positive_mass_check ? BistableNonlinearity::Checks::SkipPositiveMass
                                                              : BistableNonlinearity::Checks::All;
  if (s.nonlinearity.kind == "tabulated") {
    return ExtendedNonlinearity(BistableNonlinearity::from_csv(resolve(s, s.nonlinearity.path)));
  }
  return ExtendedNonlinearity(BistableNonlinearity::cubic(s.nonlinearity.theta, checks));
}

CrossSection build_cross_section(const Scenario& s) {
  return CrossSection(s.cross_section.lengths, s.cross_section.lipschitz_norm);
}

DriftField build_drift(const Scenario& s) {
  const auto& c = s.drift;
  DriftField d = DriftField::zero(1.0);
  if (c.kind == "concentrated") {
    d = DriftField::concentrated(c.eps, c.C);
  } else if (c.kind == "zero") {
    d = DriftField::zero(c.x0);
  } else if (c.kind == "axial_bump") {
    d = c.path.empty() ? DriftField::axial_bump(c.x, c.g) : DriftField::axial_bump_from_csv(resolve(s, c.path));
  } else {
    d = DriftField::grid_from_csv(resolve(s, c.path));
  }
  return c.gauge != 0.0 ? d.with_gauge_shift(c.gauge) : d;
}

CriterionForm build_form(const Scenario& s) {
  return s.criterion.form == "theorem" ? CriterionForm::TheoremForm : CriterionForm::PropositionForm;
}

MinimizerConfig build_minimizer_config(const Scenario& s) {
  MinimizerConfig cfg;
  cfg.tol = s.minimizer.tol;
  cfg.max_iterations = s.minimizer.max_iterations;
  return cfg;
}

SimConfig build_sim_config(const Scenario& s, double a, double wave_speed, double x0) {
  const auto& c = s.simulator;
  SimConfig cfg;
  cfg.x_minus = c.x_minus != 0.0 ? c.x_minus : -x0 - 45.0;
  cfg.x_plus = c.x_plus != 0.0 ? c.x_plus : a + 30.0;
  if (!(cfg.x_plus > cfg.x_minus)) throw ConfigError("simulator.x_plus must exceed simulator.x_minus");
  cfg.n_axial = static_cast<int>(std::lround((cfg.x_plus - cfg.x_minus) / c.h)) + 1;
  cfg.n_cross = c.cross_nodes;
  const double start = c.front_start != 0.0 ? c.front_start : a + 12.0;
  cfg.t0 = -start / wave_speed;
  cfg.t_end = c.t_end;
  cfg.dt = c.dt;
  cfg.frame_stride = c.frame_stride;
  cfg.stepper = c.stepper == "rk2" ? Stepper::RK2 : Stepper::Euler;
  cfg.advection = c.advection == "upwind"     ? Advection::Upwind
                  : c.advection == "centered" ? Advection::Centered
                                              : Advection::Fitted;
  cfg.window_fraction = c.window_fraction;
  cfg.stall_factor = c.stall_factor;
  cfg.speed_band = c.speed_band;
  cfg.margin = c.margin;
  cfg.comparison_tol = c.comparison_tol;
  return cfg;
}

}  // namespace front_blocker
