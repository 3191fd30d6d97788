#include "front_blocker/report.hpp"

#include "front_blocker/error.hpp"

#include <cstdio>
#include <fstream>

namespace front_blocker {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void write_columns(const std::filesystem::path& path, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& columns, const char* sep, const char* header_prefix) {
  if (header.size() != columns.size()) throw InternalError("header and column counts differ");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw InternalError("columns of unequal length");
  }
  auto out = open_out(path);
  out << header_prefix;
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? sep : "") << header[k];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? sep : "") << format_double(columns[k][r]);
    out << '\n';
  }
}

std::vector<std::string> field_header(int cross_dim, const char* value) {
  std::vector<std::string> h{"x1"};
  for (int i = 0; i < cross_dim; ++i) h.push_back("y" + std::to_string(i + 1));
  h.emplace_back(value);
  return h;
}

std::vector<std::vector<double>> node_columns(const TruncatedGrid& g, std::span<const double> v) {
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(g.dims()) + 1);
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    cols[0].push_back(g.x1(node));
    const auto y = g.y(node);
    for (std::size_t i = 0; i < y.size(); ++i) cols[i + 1].push_back(y[i]);
    cols.back().push_back(v[node]);
  }
  return cols;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json to_json(const Scenario& s) {
  Json j;
  j["nonlinearity"] = {{"kind", s.nonlinearity.kind},
                       {"theta", s.nonlinearity.theta},
                       {"path", s.nonlinearity.path},
                       {"skip_positive_mass_check", s.nonlinearity.skip_positive_mass_check}};
  j["cross_section"] = {{"lengths", s.cross_section.lengths}, {"lipschitz_norm", s.cross_section.lipschitz_norm}};
  j["drift"] = {{"kind", s.drift.kind}, {"eps", s.drift.eps}, {"C", s.drift.C}, {"x0", s.drift.x0},
                {"x", s.drift.x},       {"g", s.drift.g},     {"path", s.drift.path}, {"gauge", s.drift.gauge}};
  j["criterion"] = {{"form", s.criterion.form}, {"optimize_a", s.criterion.optimize_a}, {"a", s.criterion.a},
                    {"a_lo", s.criterion.a_lo}, {"a_hi", s.criterion.a_hi},           {"sobolev", s.criterion.sobolev},
                    {"C1", s.criterion.C1},     {"C2", s.criterion.C2}};
  j["minimizer"] = {{"R", s.minimizer.R},
                    {"axial_nodes", s.minimizer.axial_nodes},
                    {"cross_nodes", s.minimizer.cross_nodes},
                    {"tol", s.minimizer.tol},
                    {"max_iterations", s.minimizer.max_iterations},
                    {"certify_tol", s.minimizer.certify_tol}};
  const auto& m = s.simulator;
  j["simulator"] = {{"x_minus", m.x_minus},
                    {"x_plus", m.x_plus},
                    {"h", m.h},
                    {"cross_nodes", m.cross_nodes},
                    {"front_start", m.front_start},
                    {"t_end", m.t_end},
                    {"dt", m.dt},
                    {"frame_stride", m.frame_stride},
                    {"stepper", m.stepper},
                    {"advection", m.advection},
                    {"window_fraction", m.window_fraction},
                    {"stall_factor", m.stall_factor},
                    {"speed_band", m.speed_band},
                    {"margin", m.margin},
                    {"comparison_tol", m.comparison_tol}};
  j["output"] = {{"dir", s.output.dir}, {"seed", s.output.seed}};
  return j;
}

Json to_json(const NonlinearityConstants& c) {
  return {{"alpha", c.alpha}, {"mu", c.mu},     {"f2_inf", c.f2_inf}, {"K", c.K},
          {"K_argmin", c.K_argmin}, {"F0", c.F0}, {"Fmax", c.Fmax}};
}

Json to_json(const Exponents& e) {
  const auto r = [](const Rational& x) {
    return std::to_string(x.numerator()) + (x.denominator() == 1 ? "" : "/" + std::to_string(x.denominator()));
  };
  return {{"n", e.n}, {"q", r(e.q)}, {"p", r(e.p)}, {"m", r(e.m)}, {"j", r(e.j)}};
}

Json to_json(const DriftSummary& s) {
  Json e = Json::array();
  for (const auto& [r, v] : s.exp_integrals) e.push_back({{"r", r}, {"value", v}});
  return {{"net_drift", s.net_drift}, {"sup_exp_neg", s.sup_exp_neg}, {"exp_integrals", e},
          {"psi_ratio", s.psi_ratio}, {"x0", s.x0},                   {"measure", s.measure}};
}

Json to_json(const CriterionReport& r) {
  Json j;
  j["form"] = to_string(r.form);
  j["exponents"] = to_json(r.exponents);
  j["C1"] = r.C1;
  j["C2"] = r.C2;
  j["sobolev_provenance"] = to_string(r.provenance);
  j["net_drift"] = r.net_drift;
  j["sup_exp_neg"] = r.sup_exp_neg;
  j["exp_integral"] = r.exp_integral;
  j["measure"] = r.measure;
  j["alpha"] = r.alpha;
  j["K"] = r.K;
  j["Fmax"] = r.Fmax;
  j["gamma_taylor"] = r.gamma_taylor;
  j["gamma_tilde_q"] = r.gamma_tilde_q;
  j["gamma_tilde_m"] = r.gamma_tilde_m;
  j["branch_q"] = r.branch_q;
  j["branch_m"] = r.branch_m;
  j["b_interp"] = r.b_interp;
  j["delta"] = r.delta;
  j["delta_definition"] = r.delta_definition;
  j["delta_strict"] = r.delta_strict;
  j["a"] = r.a_used;
  j["nu"] = r.nu;
  j["beta"] = r.beta;
  j["gamma_const"] = r.gamma_const;
  j["eta_const"] = r.eta_const;
  j["margin_primary_delta"] = r.margin_primary_delta;
  j["theorem_C1"] = r.theorem_C1;
  j["theorem_C2"] = r.theorem_C2;
  j["theorem_C3"] = r.theorem_C3;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["ratio"] = r.ratio();
  j["satisfied"] = r.satisfied;
  return j;
}

Json to_json(const ConcentratedReport& r) {
  return {{"eps", r.eps},
          {"C", r.C},
          {"exp_integral_closed", r.exp_integral_closed},
          {"exp_integral_quadrature", r.exp_integral_quadrature},
          {"theorem_C1", r.theorem_C1},
          {"theorem_C2", r.theorem_C2},
          {"theorem_C3", r.theorem_C3},
          {"condition_i_literal", r.condition_i_literal},
          {"condition_i", r.condition_i},
          {"condition_ii", r.condition_ii},
          {"eps_star", r.eps_star},
          {"eps_star_bisection", r.eps_star_bisection},
          {"remark_sufficient", r.remark_sufficient},
          {"closed_form_satisfied", r.closed_form_satisfied},
          {"agree", r.agree}};
}

Json to_json(const HomogeneityAudit& r) {
  return {{"psi_minus_x0", r.psi_minus_x0}, {"psi_zero", r.psi_zero}, {"psi_sup", r.psi_sup},
          {"psi_inv_norm", r.psi_inv_norm}, {"delta", r.delta},       {"lhs", r.lhs},
          {"rhs", r.rhs},                   {"satisfied", r.satisfied}};
}

Json to_json(const WaveProfile& w, const ExtendedNonlinearity& nl) {
  return {{"speed", w.speed()},
          {"theta", w.theta()},
          {"width", w.width()},
          {"left_rate", w.left_rate()},
          {"right_rate", w.right_rate()},
          {"dz", w.dz()},
          {"z_min", w.z().front()},
          {"z_max", w.z().back()},
          {"shooting_residual", w.shooting_residual()},
          {"ode_residual", w.ode_residual(nl)},
          {"iterations", w.iterations()}};
}

Json to_json(const MinimizeResult& r) {
  const auto& g = *r.w.grid;
  Json size = Json::array();
  for (int k = 0; k < g.dims(); ++k) size.push_back(g.size(k));
  return {{"R", g.x_lo()},
          {"a", g.x_hi()},
          {"grid", size},
          {"energy", r.energy},
          {"energy_w0", r.energy_w0},
          {"ball_radius", r.ball_radius_used},
          {"distance_to_w0", r.distance_to_w0},
          {"el_residual", r.el_residual},
          {"projected_gradient", r.projected_gradient},
          {"constraint_active", r.constraint_active},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"min_value", r.min_value},
          {"max_value", r.max_value}};
}

Json to_json(const StabilizeResult& r) {
  Json runs = Json::array();
  for (const auto& m : r.runs) runs.push_back(to_json(m));
  return {{"R_used", r.R_used},
          {"runs", runs},
          {"cauchy_gaps", r.cauchy_gaps},
          {"gaps_decreasing", r.gaps_decreasing},
          {"warning", r.warning}};
}

Json to_json(const Supersolution& s) {
  return {{"R", s.R()},
          {"a", s.a()},
          {"interior_residual", s.interior_residual()},
          {"junction_slope", s.junction_slope()},
          {"min_value", s.min_value()},
          {"max_value", s.max_value()}};
}

Json to_json(const LemmaGapReport& r) {
  Json samples = Json::array();
  for (const auto& s : r.samples) {
    samples.push_back(
        {{"norm", s.norm}, {"energy_gap", s.energy_gap}, {"slack", s.slack}, {"allowance", s.allowance}});
  }
  return {{"samples", samples}, {"min_slack", r.min_slack}, {"worst_sample", r.worst_sample}, {"passed", r.passed}};
}

Json to_json(const FrontTrace& t) {
  Json j;
  j["classification"] = to_string(t.classification);
  j["late_velocity"] = t.late_velocity;
  j["propagation_velocity"] = t.propagation_velocity;
  j["propagation_samples"] = t.propagation_samples;
  j["wave_speed"] = t.wave_speed;
  j["dt"] = t.dt;
  j["steps"] = t.steps;
  j["frames"] = t.times.size();
  j["t_first"] = t.times.empty() ? 0.0 : t.times.front();
  j["t_last"] = t.times.empty() ? 0.0 : t.times.back();
  j["x_f_first"] = t.positions.empty() ? 0.0 : t.positions.front();
  j["x_f_last"] = t.positions.empty() ? 0.0 : t.positions.back();
  j["stopped_early"] = t.stopped_early;
  j["min_u"] = t.min_u;
  j["max_u"] = t.max_u;
  j["comparison_checked"] = t.comparison_checked;
  if (t.comparison_checked) {
    j["comparison_gap"] = t.comparison_gap;
    j["comparison_time"] = t.comparison_time;
    j["comparison_x1"] = t.comparison_x1;
    j["comparison_passed"] = t.comparison_passed;
  }
  return j;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  write_columns(path, header, columns, ",", "");
}

void write_dat(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  write_columns(path, header, columns, " ", "# ");
}

void write_wave(const std::filesystem::path& csv, const std::filesystem::path& dat, const WaveProfile& w) {
  write_csv(csv, {"z", "phi"}, {w.z(), w.phi()});
  write_dat(dat, {"z", "phi"}, {w.z(), w.phi()});
}

void write_field(const std::filesystem::path& csv, const DiscreteField& w) {
  const auto& g = *w.grid;
  write_csv(csv, field_header(g.dims() - 1, "w"), node_columns(g, w.values));
}

void write_centerline(const std::filesystem::path& dat, const DiscreteField& w) {
  const auto& g = *w.grid;
  std::vector<double> x, v;
  for (int i = 0; i < g.size(0); ++i) {
    x.push_back(g.coord(0, i));
    v.push_back(w.values[g.centerline(i)]);
  }
  write_dat(dat, {"x1", "w"}, {x, v});
}

void write_trace(const std::filesystem::path& csv, const std::filesystem::path& dat, const FrontTrace& t) {
  write_csv(csv, {"t", "x_f"}, {t.times, t.positions});
  write_dat(dat, {"t", "x_f"}, {t.times, t.positions});
}

void write_frame(const std::filesystem::path& csv, const SimState& s, const TruncatedGrid& g) {
  write_csv(csv, field_header(g.dims() - 1, "u"), node_columns(g, s.u));
}

}  // namespace front_blocker
