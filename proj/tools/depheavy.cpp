// depheavy: command-line front end.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "depheavy/error.hpp"
#include "depheavy/fitting.hpp"
#include "depheavy/metadata.hpp"
#include "depheavy/parallel.hpp"
#include "depheavy/report.hpp"
#include "depheavy/service.hpp"

using namespace depheavy;

namespace {

struct Common {
  std::string input;
  std::string repo = "CRAN";
  std::size_t threads = 0;
  std::string out = "-";
  int precision = 1;

  std::size_t worker_count() const { return threads ? threads : default_thread_count(); }
};

void add_input(CLI::App* cmd, Common& c) {
  cmd->add_option("--input,-i", c.input, "DCF package index or edge-list CSV")->required();
  cmd->add_option("--repo", c.repo, "Repository tag for DCF input");
  cmd->add_option("--threads", c.threads, "Worker threads (default: DEPHEAVY_THREADS or all cores)");
}

void print_diagnostics(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    std::cerr << (d.severity == Diagnostic::Severity::Error ? "error" : "warning")
              << (d.line ? " (line " + std::to_string(d.line) + ")" : std::string()) << ": "
              << d.message << '\n';
}

DepGraph load_graph(const Common& c) {
  std::vector<Diagnostic> diags;
  const auto db = load_database(c.input, Repository::parse(c.repo), &diags);
  print_diagnostics(diags);
  return DepGraph::build(db, c.worker_count());
}

// Writes to stdout for "-", otherwise to the named file.
template <class F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  write(f);
  if (!f) throw IoError("write failed for '" + path + "'");
}

void check_format(const std::string& format, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (format == a) return;
  throw DomainError("unsupported format '" + format + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dependency heaviness analytics for package ecosystems"};
  app.require_subcommand(1);

  // ingest
  std::vector<std::string> ingest_paths;
  std::vector<std::string> ingest_repos;
  std::string ingest_out = "-";
  auto* ingest = app.add_subcommand("ingest", "Parse DCF indexes into a normalized edge list");
  ingest->add_option("paths", ingest_paths, "DCF files (PACKAGES or DESCRIPTION)")->required();
  ingest->add_option("--repo", ingest_repos,
                     "Repository tag; one for all inputs or one per input")->default_str("CRAN");
  ingest->add_option("--out,-o", ingest_out, "Edge-list CSV output");

  // stats
  Common stats_c;
  std::string stats_format = "csv";
  auto* stats = app.add_subcommand("stats", "Per-package heaviness table");
  add_input(stats, stats_c);
  stats->add_option("--out,-o", stats_c.out, "Output path");
  stats->add_option("--format", stats_format, "csv or json");
  stats->add_option("--precision", stats_c.precision, "Decimals for non-integer values");

  // summary
  Common summary_c;
  std::string summary_format = "json";
  auto* summary = app.add_subcommand("summary", "Per-repository means of the main metrics");
  add_input(summary, summary_c);
  summary->add_option("--out,-o", summary_c.out, "Output path");
  summary->add_option("--format", summary_format, "csv or json");

  // top
  Common top_c;
  std::string top_metric;
  std::optional<double> top_threshold;
  std::string top_format = "csv";
  auto* top = app.add_subcommand("top", "Packages at or above a metric threshold");
  add_input(top, top_c);
  top->add_option("--metric", top_metric, "Metric name; all default lists when omitted");
  top->add_option("--threshold", top_threshold, "Minimum value");
  top->add_option("--out,-o", top_c.out, "Output path");
  top->add_option("--format", top_format, "csv or json");

  // core-graph
  Common core_c;
  std::int64_t core_h = 30;
  double core_bt = 20;
  std::string core_format = "json";
  bool core_key_only = false;
  auto* core = app.add_subcommand("core-graph", "Edges with heaviness above a threshold");
  add_input(core, core_c);
  core->add_option("--h-threshold", core_h, "Minimum edge heaviness");
  core->add_option("--bt-threshold", core_bt, "Minimum betweenness for key paths");
  core->add_option("--out", core_format, "dot or json");
  core->add_option("--file,-f", core_c.out, "Output path");
  core->add_flag("--key-paths", core_key_only, "Emit only the key-path subgraph");

  // whatif
  Common whatif_c;
  std::string whatif_pkg;
  std::vector<std::string> whatif_demote;
  auto* whatif = app.add_subcommand("whatif", "Demote parents to weak and report the loss");
  add_input(whatif, whatif_c);
  whatif->add_option("--package,-p", whatif_pkg, "Package")->required();
  whatif->add_option("--demote", whatif_demote, "Parents to demote")->delimiter(',');

  // fit
  Common fit_c;
  std::string fit_target = "heaviness";
  std::string fit_format = "json";
  std::int64_t fit_h = 30;
  std::size_t fit_drop = 5;
  auto* fit = app.add_subcommand("fit", "Fit edge heaviness or core component sizes");
  add_input(fit, fit_c);
  fit->add_option("--target", fit_target, "heaviness or components");
  fit->add_option("--format", fit_format, "json or csv");
  fit->add_option("--h-threshold", fit_h, "Core graph threshold for components");
  fit->add_option("--drop-top", fit_drop, "Largest distinct sizes left out of the power-law fit");
  fit->add_option("--out,-o", fit_c.out, "Output path");

  // stability
  Common stab_c;
  std::string stab_metric = "hc";
  int stab_max = 30;
  std::size_t stab_window = 50;
  auto* stability = app.add_subcommand("stability", "Rank stability over the penalty term");
  add_input(stability, stab_c);
  stability->add_option("--metric", stab_metric, "hc or hid");
  stability->add_option("--a-max", stab_max, "Largest penalty");
  stability->add_option("--window", stab_window, "Rank window");
  stability->add_option("--out,-o", stab_c.out, "Output path");

  // export-graph
  Common exp_c;
  std::string exp_format = "json";
  auto* export_graph = app.add_subcommand("export-graph", "Node and edge listing");
  add_input(export_graph, exp_c);
  export_graph->add_option("--format", exp_format, "json, nodes-csv or edges-csv");
  export_graph->add_option("--out,-o", exp_c.out, "Output path");

  // serve
  Common serve_c;
  std::string serve_addr = "127.0.0.1:8080";
  std::string serve_ui;
  auto* serve = app.add_subcommand("serve", "HTTP JSON query service");
  add_input(serve, serve_c);
  serve->add_option("--addr", serve_addr, "host:port");
  serve->add_option("--ui-dir", serve_ui, "Static explorer files served at /ui/");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      if (ingest_repos.size() > 1 && ingest_repos.size() != ingest_paths.size())
        throw DomainError("give one --repo for all inputs or one per input");
      std::vector<RawPackageRecord> records;
      std::vector<Diagnostic> diags;
      for (std::size_t i = 0; i < ingest_paths.size(); ++i) {
        const std::string tag =
            ingest_repos.empty() ? "CRAN" : ingest_repos[ingest_repos.size() == 1 ? 0 : i];
        auto parsed = parse_dcf(read_text_file(ingest_paths[i]), Repository::parse(tag));
        for (auto& d : parsed.diagnostics) {
          d.message = ingest_paths[i] + ": " + d.message;
          diags.push_back(std::move(d));
        }
        for (auto& r : parsed.records) records.push_back(std::move(r));
      }
      auto built = build_database(std::move(records));
      for (auto& d : built.warnings) diags.push_back(std::move(d));
      print_diagnostics(diags);
      with_output(ingest_out, [&](std::ostream& o) { write_edge_list(built.database, o); });
      std::cerr << built.database.packages.size() << " packages\n";
    } else if (*stats) {
      check_format(stats_format, {"csv", "json"});
      const auto g = load_graph(stats_c);
      const auto rows = compute_all_stats(g, AdjustmentConfig{}, stats_c.worker_count());
      const ExportOptions opt{stats_c.precision};
      with_output(stats_c.out, [&](std::ostream& o) {
        if (stats_format == "csv")
          write_stats_csv(rows, o, opt);
        else
          o << stats_json(rows, opt).dump(2) << '\n';
      });
    } else if (*summary) {
      check_format(summary_format, {"csv", "json"});
      const auto g = load_graph(summary_c);
      const auto s = ecosystem_summary(compute_all_stats(g, {}, summary_c.worker_count()));
      with_output(summary_c.out, [&](std::ostream& o) {
        if (summary_format == "csv")
          write_summary_csv(s, o);
        else
          o << summary_json(s).dump(2) << '\n';
      });
    } else if (*top) {
      check_format(top_format, {"csv", "json"});
      const auto g = load_graph(top_c);
      const auto rows = compute_all_stats(g, {}, top_c.worker_count());
      if (top_metric.empty()) {
        TopThresholds t;
        if (top_threshold) throw DomainError("--threshold needs --metric");
        const auto lists = top_lists(rows, t);
        with_output(top_c.out, [&](std::ostream& o) {
          if (top_format == "csv")
            write_top_lists_csv(lists, o);
          else
            o << top_lists_json(lists).dump(2) << '\n';
        });
      } else {
        const auto list = top_by_metric(rows, top_metric, top_threshold.value_or(0.0));
        with_output(top_c.out, [&](std::ostream& o) {
          if (top_format == "csv") {
            o << "rank,package," << top_metric << '\n';
            std::size_t rank = 0;
            for (const auto& [pkg, v] : list) o << ++rank << ',' << pkg << ',' << format_fixed(v, 1) << '\n';
          } else {
            nlohmann::ordered_json j = nlohmann::ordered_json::array();
            for (const auto& [pkg, v] : list) j.push_back({{"package", pkg}, {"value", round_to(v, 1)}});
            o << j.dump(2) << '\n';
          }
        });
      }
    } else if (*core) {
      check_format(core_format, {"dot", "json"});
      const auto g = load_graph(core_c);
      const auto table = HeavinessTable::compute(g, core_c.worker_count());
      const auto cg = core_graph(g, table.edge_h(), core_h);
      const auto kp = key_paths(cg, core_bt);
      with_output(core_c.out, [&](std::ostream& o) {
        const Subgraph& sg = core_key_only ? kp.graph : cg.graph;
        if (core_format == "dot") {
          write_subgraph_dot(g, sg, o, core_bt);
          return;
        }
        nlohmann::ordered_json j;
        j["h_threshold"] = cg.h_threshold;
        j["h_retained"] = cg.h_retained;
        j["h_total"] = cg.h_total;
        j["flow_fraction"] = cg.flow_fraction();
        j["components"] = components(cg.graph);
        j["bt_threshold"] = kp.bt_threshold;
        j["bt_flow_fraction"] = kp.flow_fraction();
        j["graph"] = subgraph_json(g, sg);
        o << j.dump(2) << '\n';
      });
    } else if (*whatif) {
      const auto g = load_graph(whatif_c);
      const NodeId p = g.id(whatif_pkg);
      std::vector<NodeId> ids;
      for (const auto& a : whatif_demote) ids.push_back(g.id(a));
      const auto w = depheavy::whatif_demote(g, p, ids);
      std::cout << g.name(p) << ": " << w.old_count << " -> " << w.new_count
                << " strong dependencies\nreduced:";
      for (NodeId r : w.reduced) std::cout << ' ' << g.name(r);
      std::cout << '\n';
    } else if (*fit) {
      check_format(fit_format, {"json", "csv"});
      const auto g = load_graph(fit_c);
      const auto table = HeavinessTable::compute(g, fit_c.worker_count());
      std::map<std::int64_t, double> hist;
      FitResult result;
      if (fit_target == "heaviness") {
        for (auto h : table.edge_h()) hist[h] += 1.0;
        const double n = static_cast<double>(table.edge_h().size());
        for (auto& [_, f] : hist) f /= n;
        result = fit_stretched_exponential(hist);
      } else if (fit_target == "components") {
        const auto cg = core_graph(g, table.edge_h(), fit_h);
        for (auto s : components(cg.graph)) hist[static_cast<std::int64_t>(s)] += 1.0;
        result = fit_power_law_histogram(hist, fit_drop);
      } else {
        throw DomainError("--target must be heaviness or components");
      }
      with_output(fit_c.out, [&](std::ostream& o) {
        if (fit_format == "csv")
          write_fit_csv(result, hist, o);
        else
          o << fit_json(result).dump(2) << '\n';
      });
    } else if (*stability) {
      if (stab_metric != "hc" && stab_metric != "hid")
        throw DomainError("--metric must be hc or hid");
      const auto g = load_graph(stab_c);
      const auto rows = compute_all_stats(g, {}, stab_c.worker_count());
      std::map<std::string, double> metric;
      std::map<std::string, std::int64_t> k;
      for (const auto& r : rows) {
        const bool hc = stab_metric == "hc";
        metric[r.name] = (hc ? r.hc : r.hid).value();
        k[r.name] = hc ? r.k_c : r.k_id;
      }
      const auto curve = stability_curve(metric, k, 1, stab_max, stab_window);
      const auto sel = select_penalty(curve, stab_metric == "hc" ? 10 : 6);
      with_output(stab_c.out, [&](std::ostream& o) { write_stability_csv(curve, o); });
      std::cerr << "selected a = " << sel.a << (sel.plateau_found ? "" : " (fallback)") << '\n';
    } else if (*export_graph) {
      check_format(exp_format, {"json", "nodes-csv", "edges-csv"});
      const auto g = load_graph(exp_c);
      with_output(exp_c.out, [&](std::ostream& o) {
        if (exp_format == "json") {
          const auto table = HeavinessTable::compute(g, exp_c.worker_count());
          o << graph_json(g, &table.edge_h()).dump(2) << '\n';
        } else if (exp_format == "nodes-csv") {
          write_graph_nodes_csv(g, o);
        } else {
          write_graph_edges_csv(g, o);
        }
      });
    } else if (*serve) {
      const auto colon = serve_addr.rfind(':');
      if (colon == std::string::npos) throw DomainError("--addr must be host:port");
      const std::string host = serve_addr.substr(0, colon);
      const int port = std::stoi(serve_addr.substr(colon + 1));
      const auto threads = serve_c.worker_count();
      const auto repo = Repository::parse(serve_c.repo);
      const std::string path = serve_c.input;
      auto loader = [path, repo, threads] {
        return ServiceSnapshot::load(path, repo, {}, threads);
      };
      QueryService service(loader(), loader);
      HttpFrontend http(service, serve_ui);
      const int bound = http.bind(host, port);
      std::cerr << "serving " << service.snapshot()->graph.size() << " packages on " << host
                << ':' << bound << '\n';
      http.listen();
    }
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
