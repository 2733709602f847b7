#pragma once

// Ecosystem-wide statistics table and its exports.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "depheavy/adjusted.hpp"
#include "depheavy/analytics.hpp"
#include "depheavy/fitting.hpp"
#include "depheavy/heaviness.hpp"

namespace depheavy {

struct PackageStatsRow {
  std::string name;
  std::string repository;
  std::int64_t n_strong = 0;
  std::int64_t k_p = 0;
  std::int64_t mhp = 0;
  std::vector<std::string> mhp_parents;
  std::optional<double> adjusted_mhp;
  std::int64_t mcohp = 0;
  std::optional<std::pair<std::string, std::string>> mcohp_pair;
  std::int64_t k_c = 0;
  Mean hc;
  std::optional<double> adjusted_hc;
  std::int64_t k_d = 0;
  Mean hd;
  std::int64_t k_id = 0;
  Mean hid;
  std::optional<double> adjusted_hid;
  std::int64_t total_downstream = 0;
  std::optional<double> gini_from_parents;
  std::optional<double> gini_on_children;
  std::int64_t depth = 0;
};

/// One row per package, sorted by name.
std::vector<PackageStatsRow> compute_all_stats(const DepGraph& g, const HeavinessTable& table,
                                               const AdjustmentConfig& config = {});
std::vector<PackageStatsRow> compute_all_stats(const DepGraph& g,
                                               const AdjustmentConfig& config = {},
                                               std::size_t threads = 1);

/// Numeric column by name ("hc", "adjusted_hc", "total_downstream", ...);
/// nullopt for absent values. Throws DomainError for unknown names.
std::optional<double> metric_value(const PackageStatsRow& row, std::string_view metric);
const std::vector<std::string>& numeric_metric_names();

struct RepositorySummary {
  std::size_t packages = 0;
  std::optional<double> strong_dependencies;
  std::optional<double> parents;
  std::optional<double> mhp;
  std::optional<double> mcohp;
  std::optional<double> children;
  std::optional<double> children_nonzero;      // over k_c > 0
  std::optional<double> hc_nonzero;            // over k_c > 0
  std::optional<double> indirect;
  std::optional<double> indirect_nonzero;      // over k_id > 0
  std::optional<double> hid_nonzero;           // over k_id > 0
};

struct EcosystemSummary {
  std::map<std::string, RepositorySummary> by_repository;
  RepositorySummary all;
};

/// Per-repository means with conditioning on nonzero children / indirect
/// downstream where noted. DomainError on empty input.
EcosystemSummary ecosystem_summary(const std::vector<PackageStatsRow>& rows);

struct TopThresholds {
  double adjusted_mhp = 60;
  double adjusted_hc = 30;
  double adjusted_hid = 20;
  double total_downstream = 5000;
};

using RankedList = std::vector<std::pair<std::string, double>>;

struct TopLists {
  RankedList adjusted_mhp, adjusted_hc, adjusted_hid, total_downstream;
};

/// Rows with metric >= threshold, descending by the metric, ties by name.
RankedList top_by_metric(const std::vector<PackageStatsRow>& rows, std::string_view metric,
                         double threshold);
TopLists top_lists(const std::vector<PackageStatsRow>& rows, const TopThresholds& t = {});

struct ExportOptions {
  int precision = 1;  // decimal places for non-integer values
};

const std::vector<std::string>& stats_columns();
void write_stats_csv(const std::vector<PackageStatsRow>& rows, std::ostream& out,
                     const ExportOptions& opt = {});
nlohmann::ordered_json stats_json(const std::vector<PackageStatsRow>& rows,
                                  const ExportOptions& opt = {});
nlohmann::ordered_json row_json(const PackageStatsRow& row, const ExportOptions& opt = {});

nlohmann::ordered_json summary_json(const EcosystemSummary& s, const ExportOptions& opt = {});
void write_summary_csv(const EcosystemSummary& s, std::ostream& out, const ExportOptions& opt = {});
nlohmann::ordered_json top_lists_json(const TopLists& t, const ExportOptions& opt = {});
void write_top_lists_csv(const TopLists& t, std::ostream& out, const ExportOptions& opt = {});

/// Nodes with repository; strong and weak edges with relation class. When
/// `edge_h` is given (aligned with strong edges) strong edges carry h.
nlohmann::ordered_json graph_json(const DepGraph& g, const std::vector<std::int64_t>* edge_h = nullptr);
void write_graph_nodes_csv(const DepGraph& g, std::ostream& out);
void write_graph_edges_csv(const DepGraph& g, std::ostream& out);

nlohmann::ordered_json subgraph_json(const DepGraph& g, const Subgraph& sg,
                                     const ExportOptions& opt = {});
void write_subgraph_dot(const DepGraph& g, const Subgraph& sg, std::ostream& out,
                        double highlight_betweenness = 20, const ExportOptions& opt = {});

nlohmann::ordered_json fit_json(const FitResult& fit);
/// x, observed, fitted for every histogram point.
void write_fit_csv(const FitResult& fit, const std::map<std::int64_t, double>& histogram,
                   std::ostream& out);

void write_stability_csv(const StabilityCurve& curve, std::ostream& out);

/// Fixed-point text with `precision` decimals.
std::string format_fixed(double value, int precision);
/// Value rounded to `precision` decimals.
double round_to(double value, int precision);

}  // namespace depheavy
