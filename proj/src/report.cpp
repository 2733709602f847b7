#include "depheavy/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

#include "depheavy/error.hpp"

namespace depheavy {

using nlohmann::ordered_json;

std::string format_fixed(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", std::max(0, precision), value);
  std::string s(buf);
  if (s.rfind("-0", 0) == 0 && std::strtod(buf, nullptr) == 0.0) s.erase(0, 1);
  return s;
}

double round_to(double value, int precision) {
  return std::strtod(format_fixed(value, precision).c_str(), nullptr);
}

// ------------------------------------------------------------------ table

std::vector<PackageStatsRow> compute_all_stats(const DepGraph& g, const HeavinessTable& table,
                                               const AdjustmentConfig& config) {
  std::int64_t n_max = 0;
  for (const auto& p : table.packages()) n_max = std::max(n_max, p.k_p);

  std::vector<PackageStatsRow> rows;
  rows.reserve(g.size());
  for (NodeId v = 0; v < g.size(); ++v) {
    const auto& h = table[v];
    PackageStatsRow r;
    r.name = g.name(v);
    r.repository = g.repository(v).label();
    r.n_strong = h.n_strong;
    r.k_p = h.k_p;
    r.mhp = h.mhp.h_max;
    for (NodeId a : h.mhp.parents) r.mhp_parents.push_back(g.name(a));
    if (n_max > 0) r.adjusted_mhp = adjusted_mhp(h.mhp.h_max, h.k_p, n_max, config.mhp_offset);
    r.mcohp = h.mcohp.h_co_max;
    if (h.mcohp.pair) r.mcohp_pair = {g.name(h.mcohp.pair->first), g.name(h.mcohp.pair->second)};
    r.k_c = h.k_c;
    r.hc = h.hc;
    if (h.hc.present()) r.adjusted_hc = adjusted_penalized(h.hc.value(), h.k_c, config.hc_penalty);
    r.k_d = h.k_d;
    r.hd = h.hd;
    r.k_id = h.k_id;
    r.hid = h.hid;
    if (h.hid.present())
      r.adjusted_hid = adjusted_penalized(h.hid.value(), h.k_id, config.hid_penalty);
    r.total_downstream = h.total_downstream;
    r.gini_from_parents = h.gini_from_parents;
    r.gini_on_children = h.gini_on_children;
    r.depth = h.depth;
    rows.push_back(std::move(r));
  }
  // ids follow sorted names already
  return rows;
}

std::vector<PackageStatsRow> compute_all_stats(const DepGraph& g, const AdjustmentConfig& config,
                                               std::size_t threads) {
  return compute_all_stats(g, HeavinessTable::compute(g, threads), config);
}

namespace {

std::optional<double> mean_or_absent(const Mean& m) {
  if (!m.present()) return std::nullopt;
  return m.value();
}

using Getter = std::function<std::optional<double>(const PackageStatsRow&)>;

const std::vector<std::pair<std::string, Getter>>& metric_table() {
  static const std::vector<std::pair<std::string, Getter>> t = {
      {"n_strong", [](const auto& r) { return std::optional<double>(r.n_strong); }},
      {"k_p", [](const auto& r) { return std::optional<double>(r.k_p); }},
      {"mhp", [](const auto& r) { return std::optional<double>(r.mhp); }},
      {"adjusted_mhp", [](const auto& r) { return r.adjusted_mhp; }},
      {"mcohp", [](const auto& r) { return std::optional<double>(r.mcohp); }},
      {"k_c", [](const auto& r) { return std::optional<double>(r.k_c); }},
      {"hc", [](const auto& r) { return mean_or_absent(r.hc); }},
      {"adjusted_hc", [](const auto& r) { return r.adjusted_hc; }},
      {"k_d", [](const auto& r) { return std::optional<double>(r.k_d); }},
      {"hd", [](const auto& r) { return mean_or_absent(r.hd); }},
      {"k_id", [](const auto& r) { return std::optional<double>(r.k_id); }},
      {"hid", [](const auto& r) { return mean_or_absent(r.hid); }},
      {"adjusted_hid", [](const auto& r) { return r.adjusted_hid; }},
      {"total_downstream", [](const auto& r) { return std::optional<double>(r.total_downstream); }},
      {"gini_from_parents", [](const auto& r) { return r.gini_from_parents; }},
      {"gini_on_children", [](const auto& r) { return r.gini_on_children; }},
      {"depth", [](const auto& r) { return std::optional<double>(r.depth); }},
  };
  return t;
}

}  // namespace

const std::vector<std::string>& numeric_metric_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, _] : metric_table()) n.push_back(name);
    return n;
  }();
  return names;
}

std::optional<double> metric_value(const PackageStatsRow& row, std::string_view metric) {
  for (const auto& [name, get] : metric_table())
    if (name == metric) return get(row);
  throw DomainError("unknown metric '" + std::string(metric) + "'");
}

// ---------------------------------------------------------------- summary

namespace {

struct Accum {
  double sum = 0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  std::optional<double> mean() const {
    if (!n) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

RepositorySummary summarize(const std::vector<const PackageStatsRow*>& rows) {
  Accum strong, parents, mhp, mcohp, children, children_nz, hc_nz, indirect, indirect_nz, hid_nz;
  for (const auto* r : rows) {
    strong.add(static_cast<double>(r->n_strong));
    parents.add(static_cast<double>(r->k_p));
    mhp.add(static_cast<double>(r->mhp));
    mcohp.add(static_cast<double>(r->mcohp));
    children.add(static_cast<double>(r->k_c));
    indirect.add(static_cast<double>(r->k_id));
    if (r->k_c > 0) {
      children_nz.add(static_cast<double>(r->k_c));
      hc_nz.add(r->hc.value());
    }
    if (r->k_id > 0) {
      indirect_nz.add(static_cast<double>(r->k_id));
      hid_nz.add(r->hid.value());
    }
  }
  RepositorySummary s;
  s.packages = rows.size();
  s.strong_dependencies = strong.mean();
  s.parents = parents.mean();
  s.mhp = mhp.mean();
  s.mcohp = mcohp.mean();
  s.children = children.mean();
  s.children_nonzero = children_nz.mean();
  s.hc_nonzero = hc_nz.mean();
  s.indirect = indirect.mean();
  s.indirect_nonzero = indirect_nz.mean();
  s.hid_nonzero = hid_nz.mean();
  return s;
}

const std::vector<std::pair<std::string, std::optional<double> RepositorySummary::*>>&
summary_fields() {
  static const std::vector<std::pair<std::string, std::optional<double> RepositorySummary::*>> f = {
      {"strong_dependencies", &RepositorySummary::strong_dependencies},
      {"parents", &RepositorySummary::parents},
      {"mhp", &RepositorySummary::mhp},
      {"mcohp", &RepositorySummary::mcohp},
      {"children", &RepositorySummary::children},
      {"children_nonzero", &RepositorySummary::children_nonzero},
      {"hc_nonzero", &RepositorySummary::hc_nonzero},
      {"indirect", &RepositorySummary::indirect},
      {"indirect_nonzero", &RepositorySummary::indirect_nonzero},
      {"hid_nonzero", &RepositorySummary::hid_nonzero},
  };
  return f;
}

ordered_json number_or_null(const std::optional<double>& v, int precision) {
  if (!v) return nullptr;
  return round_to(*v, precision);
}

std::string cell(const std::optional<double>& v, int precision) {
  return v ? format_fixed(*v, precision) : std::string();
}

}  // namespace

EcosystemSummary ecosystem_summary(const std::vector<PackageStatsRow>& rows) {
  if (rows.empty()) throw DomainError("summary of an empty table");
  std::map<std::string, std::vector<const PackageStatsRow*>> groups;
  std::vector<const PackageStatsRow*> all;
  for (const auto& r : rows) {
    groups[r.repository].push_back(&r);
    all.push_back(&r);
  }
  EcosystemSummary s;
  for (const auto& [repo, members] : groups) s.by_repository[repo] = summarize(members);
  s.all = summarize(all);
  return s;
}

ordered_json summary_json(const EcosystemSummary& s, const ExportOptions& opt) {
  auto one = [&](const RepositorySummary& r) {
    ordered_json j;
    j["packages"] = r.packages;
    for (const auto& [name, field] : summary_fields()) j[name] = number_or_null(r.*field, opt.precision);
    return j;
  };
  ordered_json j;
  j["all"] = one(s.all);
  ordered_json repos = ordered_json::object();
  for (const auto& [repo, r] : s.by_repository) repos[repo] = one(r);
  j["by_repository"] = std::move(repos);
  return j;
}

void write_summary_csv(const EcosystemSummary& s, std::ostream& out, const ExportOptions& opt) {
  out << "repository,packages";
  for (const auto& [name, _] : summary_fields()) out << ',' << name;
  out << '\n';
  auto line = [&](const std::string& repo, const RepositorySummary& r) {
    out << repo << ',' << r.packages;
    for (const auto& [_, field] : summary_fields()) out << ',' << cell(r.*field, opt.precision);
    out << '\n';
  };
  for (const auto& [repo, r] : s.by_repository) line(repo, r);
  line("all", s.all);
}

// -------------------------------------------------------------- top lists

RankedList top_by_metric(const std::vector<PackageStatsRow>& rows, std::string_view metric,
                         double threshold) {
  RankedList out;
  for (const auto& r : rows) {
    const auto v = metric_value(r, metric);
    if (v && *v >= threshold) out.emplace_back(r.name, *v);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

TopLists top_lists(const std::vector<PackageStatsRow>& rows, const TopThresholds& t) {
  return {top_by_metric(rows, "adjusted_mhp", t.adjusted_mhp),
          top_by_metric(rows, "adjusted_hc", t.adjusted_hc),
          top_by_metric(rows, "adjusted_hid", t.adjusted_hid),
          top_by_metric(rows, "total_downstream", t.total_downstream)};
}

namespace {
const std::vector<std::pair<std::string, RankedList TopLists::*>>& top_fields() {
  static const std::vector<std::pair<std::string, RankedList TopLists::*>> f = {
      {"adjusted_mhp", &TopLists::adjusted_mhp},
      {"adjusted_hc", &TopLists::adjusted_hc},
      {"adjusted_hid", &TopLists::adjusted_hid},
      {"total_downstream", &TopLists::total_downstream},
  };
  return f;
}

bool is_count_metric(std::string_view metric) {
  return metric == "total_downstream" || metric == "n_strong" || metric == "k_p" ||
         metric == "mhp" || metric == "mcohp" || metric == "k_c" || metric == "k_d" ||
         metric == "k_id" || metric == "depth";
}
}  // namespace

ordered_json top_lists_json(const TopLists& t, const ExportOptions& opt) {
  ordered_json j;
  for (const auto& [name, field] : top_fields()) {
    ordered_json list = ordered_json::array();
    for (const auto& [pkg, v] : t.*field) {
      ordered_json e;
      e["package"] = pkg;
      if (is_count_metric(name))
        e["value"] = static_cast<std::int64_t>(v);
      else
        e["value"] = round_to(v, opt.precision);
      list.push_back(std::move(e));
    }
    j[name] = std::move(list);
  }
  return j;
}

void write_top_lists_csv(const TopLists& t, std::ostream& out, const ExportOptions& opt) {
  out << "list,rank,package,value\n";
  for (const auto& [name, field] : top_fields()) {
    std::size_t rank = 0;
    for (const auto& [pkg, v] : t.*field)
      out << name << ',' << ++rank << ',' << pkg << ','
          << (is_count_metric(name) ? std::to_string(static_cast<std::int64_t>(v))
                                    : format_fixed(v, opt.precision))
          << '\n';
  }
}

// ------------------------------------------------------------ stats export

const std::vector<std::string>& stats_columns() {
  static const std::vector<std::string> cols = {
      "name",  "repository", "n_strong", "k_p",   "mhp",          "mhp_parents",
      "adjusted_mhp", "mcohp", "mcohp_pair", "k_c", "hc",         "adjusted_hc",
      "k_d",   "hd",         "k_id",     "hid",   "adjusted_hid", "total_downstream",
      "gini_from_parents", "gini_on_children", "depth"};
  return cols;
}

namespace {

std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s.push_back(sep);
    s += v[i];
  }
  return s;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void write_stats_csv(const std::vector<PackageStatsRow>& rows, std::ostream& out,
                     const ExportOptions& opt) {
  out << join(stats_columns(), ',') << '\n';
  const int p = opt.precision;
  for (const auto& r : rows) {
    out << csv_escape(r.name) << ',' << csv_escape(r.repository) << ',' << r.n_strong << ','
        << r.k_p << ',' << r.mhp << ',' << csv_escape(join(r.mhp_parents, ';')) << ','
        << cell(r.adjusted_mhp, p) << ',' << r.mcohp << ','
        << (r.mcohp_pair ? csv_escape(r.mcohp_pair->first + ";" + r.mcohp_pair->second) : "")
        << ',' << r.k_c << ',' << cell(mean_or_absent(r.hc), p) << ','
        << cell(r.adjusted_hc, p) << ',' << r.k_d << ',' << cell(mean_or_absent(r.hd), p) << ','
        << r.k_id << ',' << cell(mean_or_absent(r.hid), p) << ',' << cell(r.adjusted_hid, p)
        << ',' << r.total_downstream << ',' << cell(r.gini_from_parents, p) << ','
        << cell(r.gini_on_children, p) << ',' << r.depth << '\n';
  }
}

ordered_json row_json(const PackageStatsRow& r, const ExportOptions& opt) {
  const int p = opt.precision;
  ordered_json j;
  j["name"] = r.name;
  j["repository"] = r.repository;
  j["n_strong"] = r.n_strong;
  j["k_p"] = r.k_p;
  j["mhp"] = r.mhp;
  j["mhp_parents"] = r.mhp_parents;
  j["adjusted_mhp"] = number_or_null(r.adjusted_mhp, p);
  j["mcohp"] = r.mcohp;
  j["mcohp_pair"] = r.mcohp_pair ? ordered_json::array({r.mcohp_pair->first, r.mcohp_pair->second})
                                 : ordered_json(nullptr);
  j["k_c"] = r.k_c;
  j["hc"] = number_or_null(mean_or_absent(r.hc), p);
  j["adjusted_hc"] = number_or_null(r.adjusted_hc, p);
  j["k_d"] = r.k_d;
  j["hd"] = number_or_null(mean_or_absent(r.hd), p);
  j["k_id"] = r.k_id;
  j["hid"] = number_or_null(mean_or_absent(r.hid), p);
  j["adjusted_hid"] = number_or_null(r.adjusted_hid, p);
  j["total_downstream"] = r.total_downstream;
  j["gini_from_parents"] = number_or_null(r.gini_from_parents, p);
  j["gini_on_children"] = number_or_null(r.gini_on_children, p);
  j["depth"] = r.depth;
  return j;
}

ordered_json stats_json(const std::vector<PackageStatsRow>& rows, const ExportOptions& opt) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) arr.push_back(row_json(r, opt));
  return arr;
}

// ---------------------------------------------------------- graph exports

ordered_json graph_json(const DepGraph& g, const std::vector<std::int64_t>* edge_h) {
  ordered_json nodes = ordered_json::array();
  for (NodeId v = 0; v < g.size(); ++v)
    nodes.push_back({{"name", g.name(v)}, {"repository", g.repository(v).label()}});
  ordered_json edges = ordered_json::array();
  const auto strong = g.strong().edges();
  for (std::size_t i = 0; i < strong.size(); ++i) {
    ordered_json e = {{"parent", g.name(strong[i].parent)},
                      {"child", g.name(strong[i].child)},
                      {"relation", "strong"}};
    if (edge_h) e["h"] = (*edge_h)[i];
    edges.push_back(std::move(e));
  }
  for (const auto& w : g.weak().edges())
    edges.push_back(
        {{"parent", g.name(w.parent)}, {"child", g.name(w.child)}, {"relation", "weak"}});
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

void write_graph_nodes_csv(const DepGraph& g, std::ostream& out) {
  out << "name,repository\n";
  for (NodeId v = 0; v < g.size(); ++v)
    out << csv_escape(g.name(v)) << ',' << csv_escape(g.repository(v).label()) << '\n';
}

void write_graph_edges_csv(const DepGraph& g, std::ostream& out) {
  out << "parent,child,relation\n";
  for (const auto& e : g.strong().edges())
    out << g.name(e.parent) << ',' << g.name(e.child) << ",strong\n";
  for (const auto& e : g.weak().edges())
    out << g.name(e.parent) << ',' << g.name(e.child) << ",weak\n";
}

ordered_json subgraph_json(const DepGraph& g, const Subgraph& sg, const ExportOptions& opt) {
  ordered_json nodes = ordered_json::array();
  for (NodeId v : sg.nodes)
    nodes.push_back({{"name", g.name(v)}, {"repository", g.repository(v).label()}});
  ordered_json edges = ordered_json::array();
  for (const auto& e : sg.edges)
    edges.push_back({{"parent", g.name(e.edge.parent)},
                     {"child", g.name(e.edge.child)},
                     {"relation", "strong"},
                     {"h", e.h},
                     {"betweenness", round_to(e.betweenness, opt.precision)}});
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

void write_subgraph_dot(const DepGraph& g, const Subgraph& sg, std::ostream& out,
                        double highlight_betweenness, const ExportOptions& opt) {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') q.push_back('\\');
      q.push_back(c);
    }
    return q + "\"";
  };
  out << "digraph dependencies {\n";
  for (NodeId v : sg.nodes) out << "  " << quote(g.name(v)) << ";\n";
  for (const auto& e : sg.edges) {
    out << "  " << quote(g.name(e.edge.parent)) << " -> " << quote(g.name(e.edge.child))
        << " [label=\"" << e.h << "\", betweenness=\""
        << format_fixed(e.betweenness, opt.precision) << "\"";
    if (e.betweenness >= highlight_betweenness) out << ", color=red";
    out << "];\n";
  }
  out << "}\n";
}

// ----------------------------------------------------------- fit exports

ordered_json fit_json(const FitResult& fit) {
  ordered_json j;
  if (fit.family == FitResult::Family::StretchedExponential) {
    j["family"] = "stretched_exponential";
    j["params"] = {{"c", fit.c}, {"lambda", fit.lambda}, {"beta", fit.beta}};
  } else {
    j["family"] = "power_law";
    j["params"] = {{"exponent", fit.exponent}, {"scale", fit.scale}};
  }
  j["r_squared"] = fit.r_squared;
  j["residual"] = fit.residual;
  j["points_used"] = fit.points_used;
  j["points_dropped"] = fit.points_dropped;
  return j;
}

void write_fit_csv(const FitResult& fit, const std::map<std::int64_t, double>& histogram,
                   std::ostream& out) {
  out << "x,observed,fitted\n";
  char buf[128];
  for (const auto& [x, y] : histogram) {
    std::snprintf(buf, sizeof buf, "%lld,%.10g,%.10g\n", static_cast<long long>(x), y,
                  fit.predict(static_cast<double>(x)));
    out << buf;
  }
}

void write_stability_csv(const StabilityCurve& curve, std::ostream& out) {
  out << "a,s\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.a_values.size(); ++i) {
    out << curve.a_values[i] << ',';
    if (curve.s_values[i]) {
      std::snprintf(buf, sizeof buf, "%.6f", *curve.s_values[i]);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace depheavy
