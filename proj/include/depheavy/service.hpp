#pragma once

// Read-only JSON query service over an immutable analytics snapshot.
//
// QueryService holds the handlers; each returns a status and a JSON body so
// it can be exercised without a socket. HttpFrontend routes HTTP requests
// to them.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "depheavy/adjusted.hpp"
#include "depheavy/analytics.hpp"
#include "depheavy/graph.hpp"
#include "depheavy/heaviness.hpp"
#include "depheavy/report.hpp"

namespace depheavy {

struct SnapshotOptions {
  AdjustmentConfig adjust;
  std::int64_t h_threshold = 30;
  double bt_threshold = 20;
  ExportOptions format;
};

/// Everything a request reads, built once and replaced as a unit.
struct ServiceSnapshot {
  DepGraph graph;
  HeavinessTable table;
  std::vector<PackageStatsRow> rows;
  CoreGraph core;
  KeyPaths key;
  EcosystemSummary summary;
  SnapshotOptions options;

  static std::shared_ptr<const ServiceSnapshot> build(DepGraph graph,
                                                      const SnapshotOptions& options = {},
                                                      std::size_t threads = 1);
  /// Loads a DCF index or edge list and builds the snapshot.
  static std::shared_ptr<const ServiceSnapshot> load(const std::string& path,
                                                     const Repository& repository,
                                                     const SnapshotOptions& options = {},
                                                     std::size_t threads = 1);
};

struct Response {
  int status = 200;
  nlohmann::ordered_json body;
};

using QueryParams = std::map<std::string, std::string>;

class QueryService {
 public:
  using Loader = std::function<std::shared_ptr<const ServiceSnapshot>()>;

  /// `loader` backs POST /reload; without one reload answers 501.
  explicit QueryService(std::shared_ptr<const ServiceSnapshot> snapshot, Loader loader = {});

  std::shared_ptr<const ServiceSnapshot> snapshot() const;
  void replace(std::shared_ptr<const ServiceSnapshot> snapshot);

  /// sort=<metric|name>, dir=asc|desc, page (1-based), per_page (default
  /// 100, at most 1000). Absent values sort last.
  Response packages(const QueryParams& q) const;
  Response package(const std::string& name) const;
  /// Every upstream package with its shortest path to the package (ties
  /// broken by the smallest next hop) and h_u, plus the upstream subgraph
  /// with per-edge h.
  Response upstream(const std::string& name) const;
  /// Downstream packages with distance, smallest shortest path and h_u of
  /// the package on them. min_depth/max_depth filter by distance; paged
  /// like /packages.
  Response downstream(const std::string& name, const QueryParams& q) const;
  /// Downstream subgraph with single-parent leaves grouped per parent and
  /// edges above the betweenness elbow flagged.
  Response downstream_graph(const std::string& name, const QueryParams& q) const;
  Response core_graph() const;
  Response key_paths() const;
  Response summary() const;
  /// Body {"package": P, "demote": [A, ...]}.
  Response whatif(const std::string& body) const;
  Response reload();

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const ServiceSnapshot> snapshot_;
  Loader loader_;
};

/// Betweenness cutoff at the largest drop in the descending sequence: edges
/// at or above the returned value are flagged. nullopt when no drop exists.
std::optional<double> elbow_cutoff(std::vector<double> betweenness);

class HttpFrontend {
 public:
  /// Static files under `ui_dir` are served at /ui/ when it is non-empty.
  explicit HttpFrontend(QueryService& service, std::string ui_dir = {});
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port. Throws
  /// IoError on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace depheavy
