#pragma once

#include "front_blocker/criterion.hpp"
#include "front_blocker/scenario.hpp"
#include "front_blocker/simulator.hpp"
#include "front_blocker/supersolution.hpp"
#include "front_blocker/traveling_wave.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace front_blocker {

using Json = nlohmann::ordered_json;

/// Every resolved scenario value, defaults included, in declaration order.
Json to_json(const Scenario& s);
Json to_json(const NonlinearityConstants& c);
Json to_json(const Exponents& e);
Json to_json(const DriftSummary& s);
Json to_json(const CriterionReport& r);
Json to_json(const ConcentratedReport& r);
Json to_json(const HomogeneityAudit& r);
/// Speed, width and residuals; the profile itself goes to CSV.
Json to_json(const WaveProfile& w, const ExtendedNonlinearity& nl);
/// Scalars only; the field goes to CSV.
Json to_json(const MinimizeResult& r);
Json to_json(const StabilizeResult& r);
Json to_json(const Supersolution& s);
Json to_json(const LemmaGapReport& r);
/// Verdict and scalars; the (t, x_f) samples go to CSV.
Json to_json(const FrontTrace& t);

/// Pretty-printed with a trailing newline. Object keys keep insertion order
/// and doubles use the shortest round-trip form, so equal inputs give
/// byte-identical files.
void write_json(const std::filesystem::path& path, const Json& j);

/// Comma-separated with a header row; doubles printed with %.17g.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);
/// Whitespace-separated columns with a '#' header line, for gnuplot.
void write_dat(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// Rows (z, phi).
void write_wave(const std::filesystem::path& csv, const std::filesystem::path& dat, const WaveProfile& w);
/// Rows (x1, y_1, ..., y_{n-1}, w) over all grid nodes.
void write_field(const std::filesystem::path& csv, const DiscreteField& w);
/// Centerline (x1, w) for plotting.
void write_centerline(const std::filesystem::path& dat, const DiscreteField& w);
/// Rows (t, x_f).
void write_trace(const std::filesystem::path& csv, const std::filesystem::path& dat, const FrontTrace& t);
/// Rows (x1, y_1, ..., y_{n-1}, u) of one simulator state.
void write_frame(const std::filesystem::path& csv, const SimState& s, const TruncatedGrid& g);

/// %.17g.
std::string format_double(double v);

}  // namespace front_blocker
