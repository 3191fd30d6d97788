#include "front_blocker/cli.hpp"

#include "front_blocker/error.hpp"
#include "front_blocker/sobolev.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace front_blocker {

CriterionRun run_criterion(const Scenario& s) {
  const ExtendedNonlinearity nl = build_nonlinearity(s);
  const CrossSection cs = build_cross_section(s);
  const DriftField d = build_drift(s);
  const Exponents ex = exponents_for(cs.ambient_dim());
  const NonlinearityConstants nc = compute_constants(nl);
  const DriftSummary ds = summarize(d, cs, {Exponents::d(ex.j / 2)});
  SobolevConstants sc;
  if (s.criterion.sobolev == "estimated") {
    sc = estimate_sobolev_constants(cs, d.x0());
  } else {
    sc.C1 = s.criterion.C1;
    sc.C2 = s.criterion.C2;
  }
  const CriterionForm form = build_form(s);
  CriterionReport report;
  if (s.criterion.optimize_a) {
    report = optimize_a(nc, sc, ds, ex, cs, {s.criterion.a_lo, s.criterion.a_hi}, form).second;
  } else {
    const double a = s.criterion.a > 0.0 ? s.criterion.a : optimal_a_closed_form(nc);
    report = evaluate(nc, sc, ds, ex, cs, a, form);
  }
  CriterionRun run{nl, nc, cs, d, ex, sc, ds, report, homogeneity_audit(nc, sc, d, ex, cs, report.a_used), {}};
  if (d.family() == DriftField::Family::Concentrated && d.strength() > 0.0) {
    run.concentrated = concentrated_thresholds(cs.ambient_dim(), nc, sc, cs, d.eps(), d.strength(), report.a_used);
  }
  return run;
}

MinimizeRun run_minimize(const Scenario& s, const CriterionRun& c) {
  const auto& m = s.minimizer;
  const double r_min = *std::min_element(m.R.begin(), m.R.end());
  const double h1 = (c.a() - r_min) / (m.axial_nodes - 1);
  MinimizeRun run;
  run.stabilize = stabilize_in_R(c.drift, c.cs, c.nl, c.delta(), c.a(), h1, m.cross_nodes, m.R,
                                 build_minimizer_config(s));
  const MinimizeResult& last = run.stabilize.last();
  run.energy_decreased = last.energy <= last.energy_w0;
  try {
    run.supersolution = std::make_shared<const Supersolution>(extend_and_certify(last.w, c.nl, m.certify_tol));
  } catch (const CertificateError& e) {
    run.certificate_error = e.what();
  }
  run.passed = last.converged && !last.constraint_active && run.energy_decreased && run.supersolution != nullptr;
  return run;
}

FrontTrace run_simulation(const Scenario& s, const CriterionRun& c, const WaveProfile& wave, const Supersolution* w,
                          const FrameCallback& on_frame) {
  const SimConfig cfg = build_sim_config(s, c.a(), wave.speed(), c.drift.x0());
  return run_and_classify(cfg, c.nl, c.drift, c.cs, wave, w, on_frame);
}

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "C") return SweepParam::C;
  if (name == "eps") return SweepParam::Eps;
  if (name == "theta") return SweepParam::Theta;
  if (name == "n") return SweepParam::N;
  throw ConfigError("unknown sweep parameter '" + name + "' (expected C, eps, theta or n)");
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::C: return "C";
    case SweepParam::Eps: return "eps";
    case SweepParam::Theta: return "theta";
    case SweepParam::N: return "n";
  }
  return "?";
}

namespace {

void set_dimension(Scenario& s, int n) {
  if (n < 3) throw ConfigError("dimension n must be at least 3");
  const auto k = static_cast<std::size_t>(n - 1);
  s.cross_section.lengths.assign(k, s.cross_section.lengths.front());
  s.minimizer.cross_nodes.assign(k, s.minimizer.cross_nodes.front());
  s.simulator.cross_nodes.assign(k, s.simulator.cross_nodes.front());
}

}  // namespace

Scenario with_param(const Scenario& s, SweepParam p, double value) {
  Scenario out = s;
  switch (p) {
    case SweepParam::C:
    case SweepParam::Eps:
      if (s.drift.kind != "concentrated") throw ConfigError("sweeps over C and eps need drift.kind = \"concentrated\"");
      (p == SweepParam::C ? out.drift.C : out.drift.eps) = value;
      break;
    case SweepParam::Theta:
      if (s.nonlinearity.kind != "cubic") throw ConfigError("sweeps over theta need nonlinearity.kind = \"cubic\"");
      out.nonlinearity.theta = value;
      break;
    case SweepParam::N:
      set_dimension(out, static_cast<int>(std::lround(value)));
      break;
  }
  return out;
}

unsigned worker_threads(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FRONT_BLOCKER_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

SweepResult run_sweep(const Scenario& s, SweepParam p, const std::vector<double>& values, bool simulate,
                      unsigned threads) {
  SweepResult result;
  result.param = p;
  result.points.resize(values.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepPoint& pt = result.points[i];
      pt.value = values[i];
      try {
        const Scenario si = with_param(s, p, values[i]);
        const CriterionRun c = run_criterion(si);
        pt.satisfied = c.report.satisfied;
        pt.lhs = c.report.lhs;
        pt.rhs = c.report.rhs;
        pt.delta = c.report.delta;
        if (simulate) {
          const FrontTrace t = run_simulation(si, c, solve_wave(c.nl));
          pt.classification = to_string(t.classification);
          pt.late_velocity = t.late_velocity;
        }
      } catch (const std::exception& e) {
        pt.classification = "error";
        pt.error = e.what();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned k = 0; k < std::max(1u, threads); ++k) pool.emplace_back(work);
  pool.clear();

  for (std::size_t i = 1; i < result.points.size(); ++i) {
    if (result.points[i].satisfied != result.points[i - 1].satisfied) ++result.transitions;
  }
  result.monotone = result.transitions == 0 || (result.transitions == 1 && result.points.back().satisfied);
  return result;
}

namespace {

struct Globals {
  std::string config;
  std::string out_dir;
};

Scenario load(const Globals& g) {
  Scenario s = g.config.empty() ? Scenario{} : load_scenario(g.config);
  if (!g.out_dir.empty()) s.output.dir = g.out_dir;
  return s;
}

std::filesystem::path out_path(const Scenario& s, const std::string& name) {
  return std::filesystem::path(s.output.dir) / name;
}

Json criterion_json(const Scenario& s, const CriterionRun& c) {
  Json j;
  j["scenario"] = to_json(s);
  j["nonlinearity_constants"] = to_json(c.nc);
  j["drift_summary"] = to_json(c.summary);
  j["criterion"] = to_json(c.report);
  j["homogeneity_audit"] = to_json(c.audit);
  if (c.concentrated) j["concentrated"] = to_json(*c.concentrated);
  return j;
}

Json minimize_json(const MinimizeRun& m) {
  Json j;
  j["stabilize"] = to_json(m.stabilize);
  j["energy_decreased"] = m.energy_decreased;
  j["certificate_passed"] = m.supersolution != nullptr;
  if (m.supersolution) j["supersolution"] = to_json(*m.supersolution);
  if (!m.certificate_error.empty()) j["certificate_error"] = m.certificate_error;
  j["passed"] = m.passed;
  return j;
}

void print_criterion(std::ostream& out, const CriterionRun& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "criterion (%s): lhs = %.6g, rhs = %.6g, ratio = %.6g, delta = %.6g, a = %.6g -> %s\n",
                to_string(c.report.form).c_str(), c.report.lhs, c.report.rhs, c.report.ratio(), c.report.delta,
                c.report.a_used, c.report.satisfied ? "satisfied" : "not satisfied");
  out << buf;
}

void print_minimize(std::ostream& out, const MinimizeRun& m) {
  char buf[256];
  for (std::size_t i = 0; i < m.stabilize.runs.size(); ++i) {
    const auto& r = m.stabilize.runs[i];
    std::snprintf(buf, sizeof buf, "minimize R = %.6g: %d iterations, EL residual %.3g, %s, J = %.9g (J(w0) = %.9g)\n",
                  m.stabilize.R_used[i], r.iterations, r.el_residual, r.constraint_active ? "on the sphere" : "interior",
                  r.energy, r.energy_w0);
    out << buf;
  }
  for (double gap : m.stabilize.cauchy_gaps) {
    std::snprintf(buf, sizeof buf, "  Cauchy gap %.3g\n", gap);
    out << buf;
  }
  if (!m.stabilize.warning.empty()) out << "  warning: " << m.stabilize.warning << '\n';
  out << "extension certificate: " << (m.supersolution ? "passed" : "FAILED: " + m.certificate_error) << '\n';
}

void print_trace(std::ostream& out, const FrontTrace& t) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "simulate: %s, late velocity %.4g, propagation velocity %.4g (c = %.6g), %ld steps\n",
                to_string(t.classification).c_str(), t.late_velocity, t.propagation_velocity, t.wave_speed, t.steps);
  out << buf;
  if (t.comparison_checked) {
    std::snprintf(buf, sizeof buf, "comparison: max(u - w) = %.3g at t = %.4g, x1 = %.4g -> %s\n", t.comparison_gap,
                  t.comparison_time, t.comparison_x1, t.comparison_passed ? "passed" : "FAILED");
    out << buf;
  }
}

void write_minimize_artifacts(const Scenario& s, const MinimizeRun& m) {
  const DiscreteField& w = m.stabilize.last().w;
  write_field(out_path(s, "w.csv"), w);
  write_centerline(out_path(s, "w_centerline.dat"), w);
}

int cmd_wave(const Scenario& s, std::ostream& out) {
  const ExtendedNonlinearity nl = build_nonlinearity(s);
  const WaveProfile w = solve_wave(nl);
  write_wave(out_path(s, "wave.csv"), out_path(s, "wave.dat"), w);
  Json j;
  j["scenario"] = to_json(s);
  j["wave"] = to_json(w, nl);
  write_json(out_path(s, "wave.json"), j);
  out << "c = " << format_double(w.speed()) << '\n';
  return exit_code::ok;
}

int cmd_criterion(const Scenario& s, std::ostream& out) {
  const CriterionRun c = run_criterion(s);
  write_json(out_path(s, "criterion.json"), criterion_json(s, c));
  print_criterion(out, c);
  return c.report.satisfied ? exit_code::ok : exit_code::criterion_unsatisfied;
}

int cmd_minimize(const Scenario& s, std::ostream& out) {
  const CriterionRun c = run_criterion(s);
  print_criterion(out, c);
  const MinimizeRun m = run_minimize(s, c);
  write_minimize_artifacts(s, m);
  Json j;
  j["scenario"] = to_json(s);
  j["criterion"] = to_json(c.report);
  j["minimize"] = minimize_json(m);
  write_json(out_path(s, "minimize.json"), j);
  print_minimize(out, m);
  return m.passed ? exit_code::ok : exit_code::certificate_failure;
}

int cmd_simulate(const Scenario& s, bool compare, bool frames, std::ostream& out) {
  const CriterionRun c = run_criterion(s);
  const WaveProfile wave = solve_wave(c.nl);
  std::optional<MinimizeRun> m;
  if (compare) {
    m = run_minimize(s, c);
    if (!m->supersolution) {
      out << "extension certificate failed: " << m->certificate_error << '\n';
      return exit_code::certificate_failure;
    }
  }
  FrameCallback on_frame;
  int frame = 0;
  if (frames) {
    on_frame = [&](const SimState& st, const TruncatedGrid& g) {
      char name[64];
      std::snprintf(name, sizeof name, "frames/frame_%06d.csv", frame++);
      write_frame(out_path(s, name), st, g);
    };
  }
  const FrontTrace t = run_simulation(s, c, wave, m ? m->supersolution.get() : nullptr, on_frame);
  write_trace(out_path(s, "trace.csv"), out_path(s, "trace.dat"), t);
  Json j;
  j["scenario"] = to_json(s);
  j["simulation"] = to_json(t);
  write_json(out_path(s, "simulate.json"), j);
  print_trace(out, t);
  return t.comparison_checked && !t.comparison_passed ? exit_code::certificate_failure : exit_code::ok;
}

int cmd_sweep(const Scenario& s, const std::string& param, double from, double to, int steps, bool simulate,
              std::ostream& out, std::ostream& err) {
  if (steps < 1) throw ConfigError("--steps must be at least 1");
  const SweepParam p = parse_sweep_param(param);
  std::vector<double> values;
  for (int i = 0; i < steps; ++i) {
    double v = steps == 1 ? from : from + (to - from) * i / (steps - 1);
    if (p == SweepParam::N) v = static_cast<double>(std::lround(v));
    if (values.empty() || v != values.back()) values.push_back(v);
  }
  const SweepResult r = run_sweep(s, p, values, simulate, worker_threads(values.size()));

  std::vector<double> v, sat, lhs, rhs;
  auto csv = std::ofstream();
  const auto csv_path = out_path(s, "sweep.csv");
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  csv.open(csv_path);
  if (!csv) throw ConfigError("cannot write " + csv_path.string());
  csv << to_string(p) << ",satisfied,lhs,rhs,classification\n";
  Json points = Json::array();
  for (const auto& pt : r.points) {
    csv << format_double(pt.value) << ',' << (pt.satisfied ? "true" : "false") << ',' << format_double(pt.lhs) << ','
        << format_double(pt.rhs) << ',' << pt.classification << '\n';
    v.push_back(pt.value);
    sat.push_back(pt.satisfied ? 1.0 : 0.0);
    lhs.push_back(pt.lhs);
    rhs.push_back(pt.rhs);
    Json jp = {{"value", pt.value},       {"satisfied", pt.satisfied},          {"lhs", pt.lhs},
               {"rhs", pt.rhs},           {"delta", pt.delta},                  {"classification", pt.classification},
               {"late_velocity", pt.late_velocity}};
    if (!pt.error.empty()) {
      jp["error"] = pt.error;
      err << "sweep point " << to_string(p) << " = " << format_double(pt.value) << ": " << pt.error << '\n';
    }
    points.push_back(jp);
  }
  write_dat(out_path(s, "sweep.dat"), {to_string(p), "satisfied", "lhs", "rhs"}, {v, sat, lhs, rhs});
  Json j;
  j["scenario"] = to_json(s);
  j["sweep"] = {{"param", to_string(p)}, {"simulate", simulate}, {"points", points},
                {"transitions", r.transitions}, {"monotone", r.monotone}};
  write_json(out_path(s, "sweep.json"), j);
  out << "sweep over " << to_string(p) << ": " << r.points.size() << " points, " << r.transitions
      << " transition(s) of 'satisfied'" << (r.monotone ? "" : " (not monotone)") << '\n';
  if (!r.monotone) err << "warning: 'satisfied' is not monotone along the sweep\n";
  return exit_code::ok;
}

int cmd_verify(const Scenario& s, std::ostream& out) {
  Json j;
  j["scenario"] = to_json(s);
  const CriterionRun c = run_criterion(s);
  print_criterion(out, c);
  j["criterion"] = criterion_json(s, c)["criterion"];
  const auto finish = [&](const char* stage, int code) {
    j["stopped_at"] = stage;
    j["exit_code"] = code;
    write_json(out_path(s, "verify.json"), j);
    return code;
  };
  if (!c.report.satisfied) return finish("criterion", exit_code::criterion_unsatisfied);

  const MinimizeRun m = run_minimize(s, c);
  write_minimize_artifacts(s, m);
  j["minimize"] = minimize_json(m);
  print_minimize(out, m);
  if (!m.passed) return finish("minimize", exit_code::certificate_failure);

  const WaveProfile wave = solve_wave(c.nl);
  const FrontTrace t = run_simulation(s, c, wave, m.supersolution.get());
  write_trace(out_path(s, "trace.csv"), out_path(s, "trace.dat"), t);
  j["simulation"] = to_json(t);
  print_trace(out, t);
  const bool ok = t.classification == Classification::Blocked && t.comparison_passed;
  out << "verify: " << (ok ? "all certificates passed" : "FAILED") << '\n';
  return finish("complete", ok ? exit_code::ok : exit_code::certificate_failure);
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blocking criterion, constrained minimizer and front simulator for drifted bistable fronts",
               args.empty() ? "front_blocker" : args.front()};
  app.require_subcommand(1, 1);
  Globals g;
  app.add_option("--config", g.config, "scenario TOML file (defaults apply when omitted)")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "artifact directory (overrides output.dir)");

  auto* wave = app.add_subcommand("wave", "traveling wave: prints c, writes (z, phi)");
  auto* crit = app.add_subcommand("criterion", "evaluate the blocking criterion; exit 2 if unsatisfied");
  int n = 0;
  std::string form;
  bool opt_a = false;
  double c1 = 0.0, c2 = 0.0;
  crit->add_option("--n", n, "ambient dimension (cross-section lengths repeat the first)")->check(CLI::Range(3, 64));
  crit->add_option("--form", form, "criterion form")->check(CLI::IsMember({"theorem", "prop"}));
  crit->add_flag("--optimize-a", opt_a, "maximize lhs/rhs over a in [a_lo, a_hi]");
  crit->add_option("--sobolev-c1", c1, "configured H^1 -> L^q constant")->check(CLI::PositiveNumber);
  crit->add_option("--sobolev-c2", c2, "configured W^{1,p} -> L^m constant")->check(CLI::PositiveNumber);
  auto* mini = app.add_subcommand("minimize", "constrained minimizers over R and the extension certificate");
  auto* sim = app.add_subcommand("simulate", "simulate from the traveling-wave datum and classify the front");
  bool compare = false, frames = false;
  sim->add_flag("--compare", compare, "also build the supersolution and record max(u - w)");
  sim->add_flag("--frames", frames, "dump a CSV frame every frame_stride steps");
  auto* sweep = app.add_subcommand("sweep", "criterion (and simulation) over a parameter range");
  std::string param;
  double from = 0.0, to = 0.0;
  int steps = 0;
  bool no_sim = false;
  sweep->add_option("--param", param, "C | eps | theta | n")->required()->check(CLI::IsMember({"C", "eps", "theta", "n"}));
  sweep->add_option("--from", from)->required();
  sweep->add_option("--to", to)->required();
  sweep->add_option("--steps", steps)->required()->check(CLI::PositiveNumber);
  sweep->add_flag("--no-simulate", no_sim, "skip the per-point simulation (classification = skipped)");
  auto* verify = app.add_subcommand("verify", "criterion -> minimize -> certify -> simulate -> comparison");
  for (auto* sub : {wave, crit, mini, sim, sweep, verify}) sub->fallthrough();

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return exit_code::usage;
  }

  try {
    Scenario s = load(g);
    if (crit->parsed()) {
      if (n > 0) set_dimension(s, n);
      if (!form.empty()) s.criterion.form = form;
      if (opt_a) s.criterion.optimize_a = true;
      if (c1 > 0.0) {
        s.criterion.C1 = c1;
        s.criterion.sobolev = "configured";
      }
      if (c2 > 0.0) {
        s.criterion.C2 = c2;
        s.criterion.sobolev = "configured";
      }
      return cmd_criterion(s, out);
    }
    if (wave->parsed()) return cmd_wave(s, out);
    if (mini->parsed()) return cmd_minimize(s, out);
    if (sim->parsed()) return cmd_simulate(s, compare, frames, out);
    if (sweep->parsed()) return cmd_sweep(s, param, from, to, steps, !no_sim, out, err);
    return cmd_verify(s, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const CertificateError& e) {
    err << "certificate failed: " << e.what() << '\n';
    return exit_code::certificate_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::certificate_failure;
  }
}

int run_subcommand(int argc, char** argv) {
  return run_subcommand(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace front_blocker
