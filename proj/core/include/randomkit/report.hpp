#pragma once

// Serialization of results: CSV and JSON tables and self-contained SVG plots.
//
// CSV: comma separated, header row, LF line endings, numbers printed with
// 17 significant digits so that re-parsing gives back the same doubles.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "randomkit/engine.hpp"
#include "randomkit/metrics.hpp"
#include "randomkit/oracle.hpp"

namespace randomkit {

/// "%.17g"; NaN prints as "nan", infinities as "inf" / "-inf".
std::string format_double(double x);

/// procedure,step,estimate,se — se is left empty for series without one.
void write_series_csv(std::ostream& out, std::span<const MetricSeries> series);
/// Inverse of write_series_csv. The metric name is not part of the file and
/// is set from `metric`. Throws std::runtime_error on malformed input.
std::vector<MetricSeries> read_series_csv(std::istream& in, const std::string& metric = {});

/// procedure,replicate,value
void write_final_imb_csv(std::ostream& out, std::span<const FinalImbalanceSample> samples);
/// procedure,step,arm,pi,se — arms are 1-based.
void write_arp_csv(std::ostream& out, std::span<const ArpTable> tables);

/// step,arm,N_1..N_K — the assigned arm (1-based) and counts after the step.
void write_assignments_csv(std::ostream& out, const TrialPath& path, int arms);
/// step,phi_1..phi_K — probabilities used for the step.
void write_probabilities_csv(std::ostream& out, const TrialPath& path, int arms);
/// Fixed-width console rendering of both tables side by side.
void print_sequence_table(std::ostream& out, const std::string& label, const TrialPath& path, int arms);

nlohmann::json to_json(const MetricSeries& s);
nlohmann::json to_json(std::span<const FinalImbalanceSample> samples);
nlohmann::json to_json(const ArpTable& t);
nlohmann::json to_json(const ComparisonReport& r);
nlohmann::json to_json(const TrialPath& path);
/// Full result with 1-based arms; from_json restores an equal object.
nlohmann::json to_json(const SimulationResult& sr);
SimulationResult simulation_result_from_json(const nlohmann::json& j);

// SVG plots. All return a complete standalone document.

/// One line per series against step.
std::string svg_line_plot(const std::string& title, const std::string& y_label,
                          std::span<const MetricSeries> series);
/// Procedures x steps grid coloured by value (used for G(j)).
std::string svg_heatmap(const std::string& title, std::span<const MetricSeries> series);
/// Mirrored kernel density of the final imbalance for each procedure.
std::string svg_violin(const std::string& title, std::span<const FinalImbalanceSample> samples);
/// pi_jk per arm with the target rho_k as dashed reference lines.
std::string svg_arp_plot(const ArpTable& table);

}  // namespace randomkit
