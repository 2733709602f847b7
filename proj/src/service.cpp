#include "depheavy/service.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include <httplib.h>

#include "depheavy/error.hpp"

namespace depheavy {

using nlohmann::ordered_json;

// --------------------------------------------------------------- snapshot

std::shared_ptr<const ServiceSnapshot> ServiceSnapshot::build(DepGraph graph,
                                                              const SnapshotOptions& options,
                                                              std::size_t threads) {
  auto s = std::make_shared<ServiceSnapshot>();
  s->graph = std::move(graph);
  s->options = options;
  s->table = HeavinessTable::compute(s->graph, threads);
  s->rows = compute_all_stats(s->graph, s->table, options.adjust);
  s->core = depheavy::core_graph(s->graph, s->table.edge_h(), options.h_threshold);
  s->key = depheavy::key_paths(s->core, options.bt_threshold);
  if (!s->rows.empty()) s->summary = ecosystem_summary(s->rows);
  return s;
}

std::shared_ptr<const ServiceSnapshot> ServiceSnapshot::load(const std::string& path,
                                                             const Repository& repository,
                                                             const SnapshotOptions& options,
                                                             std::size_t threads) {
  const auto db = load_database(path, repository);
  return build(DepGraph::build(db, threads), options, threads);
}

// ---------------------------------------------------------------- helpers

namespace {

Response error(int status, const std::string& message, const std::string& package = {}) {
  ordered_json body;
  body["error"] = message;
  body["package"] = package.empty() ? ordered_json(nullptr) : ordered_json(package);
  return {status, std::move(body)};
}

template <class F>
Response guarded(F&& f) {
  try {
    return f();
  } catch (const NotFoundError& e) {
    return error(404, e.what(), e.package());
  } catch (const DomainError& e) {
    return error(400, e.what());
  } catch (const ParseError& e) {
    return error(400, e.what());
  } catch (const nlohmann::json::exception& e) {
    return error(400, std::string("invalid JSON: ") + e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

std::int64_t int_param(const QueryParams& q, const std::string& key, std::int64_t fallback) {
  auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return fallback;
  std::int64_t v = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DomainError("parameter '" + key + "' must be an integer");
  return v;
}

struct Page {
  std::size_t page = 1, per_page = 100, begin = 0, end = 0;
};

Page paginate(const QueryParams& q, std::size_t total) {
  const auto page = int_param(q, "page", 1);
  const auto per = int_param(q, "per_page", 100);
  if (page < 1) throw DomainError("page must be at least 1");
  if (per < 1) throw DomainError("per_page must be at least 1");
  Page p;
  p.page = static_cast<std::size_t>(page);
  p.per_page = static_cast<std::size_t>(std::min<std::int64_t>(per, 1000));
  p.begin = std::min(total, (p.page - 1) * p.per_page);
  p.end = std::min(total, p.begin + p.per_page);
  return p;
}

struct DepthRange {
  std::uint32_t min = 1;
  std::uint32_t max = std::numeric_limits<std::uint32_t>::max() - 1;
  bool contains(std::uint32_t d) const { return d >= min && d <= max; }
};

DepthRange depth_range(const QueryParams& q) {
  DepthRange r;
  const auto lo = int_param(q, "min_depth", 1);
  const auto hi = int_param(q, "max_depth", -1);
  if (lo < 0) throw DomainError("min_depth must be non-negative");
  r.min = static_cast<std::uint32_t>(std::max<std::int64_t>(lo, 1));
  if (hi >= 0) {
    if (hi < lo) throw DomainError("max_depth is below min_depth");
    r.max = static_cast<std::uint32_t>(hi);
  }
  return r;
}

// BFS tree from p over children. Neighbours are visited in name order and
// the queue in rank order, so each tree path is the lexicographically
// smallest shortest path.
struct ForwardTree {
  std::vector<std::uint32_t> dist;
  std::vector<NodeId> pred;
  std::vector<NodeId> order;
};

ForwardTree forward_tree(const Digraph& g, NodeId p) {
  ForwardTree t;
  t.dist.assign(g.node_count(), kUnreachable);
  t.pred.assign(g.node_count(), p);
  t.dist[p] = 0;
  t.order.push_back(p);
  for (std::size_t i = 0; i < t.order.size(); ++i) {
    const NodeId u = t.order[i];
    for (NodeId w : g.children(u)) {
      if (t.dist[w] != kUnreachable) continue;
      t.dist[w] = t.dist[u] + 1;
      t.pred[w] = u;
      t.order.push_back(w);
    }
  }
  return t;
}

ordered_json names_of(const DepGraph& g, const std::vector<NodeId>& ids) {
  ordered_json a = ordered_json::array();
  for (NodeId v : ids) a.push_back(g.name(v));
  return a;
}

std::int64_t edge_h(const ServiceSnapshot& s, NodeId parent, NodeId child) {
  return s.table.edge_h()[*s.graph.strong().edge_index(parent, child)];
}

}  // namespace

std::optional<double> elbow_cutoff(std::vector<double> betweenness) {
  if (betweenness.size() < 2) return std::nullopt;
  std::sort(betweenness.rbegin(), betweenness.rend());
  std::size_t at = 0;
  double drop = 0;
  for (std::size_t i = 0; i + 1 < betweenness.size(); ++i) {
    const double d = betweenness[i] - betweenness[i + 1];
    if (d > drop) {
      drop = d;
      at = i;
    }
  }
  if (!(drop > 0)) return std::nullopt;
  return betweenness[at];
}

// ---------------------------------------------------------------- service

QueryService::QueryService(std::shared_ptr<const ServiceSnapshot> snapshot, Loader loader)
    : snapshot_(std::move(snapshot)), loader_(std::move(loader)) {
  if (!snapshot_) throw DomainError("service needs a snapshot");
}

std::shared_ptr<const ServiceSnapshot> QueryService::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

void QueryService::replace(std::shared_ptr<const ServiceSnapshot> snapshot) {
  if (!snapshot) throw DomainError("service needs a snapshot");
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(snapshot);
}

Response QueryService::packages(const QueryParams& q) const {
  return guarded([&] {
    const auto s = snapshot();
    const auto sort_it = q.find("sort");
    const std::string sort = sort_it == q.end() || sort_it->second.empty() ? "name" : sort_it->second;
    const auto dir_it = q.find("dir");
    const std::string dir = dir_it == q.end() || dir_it->second.empty() ? "asc" : dir_it->second;
    if (dir != "asc" && dir != "desc") throw DomainError("dir must be asc or desc");
    const bool desc = dir == "desc";

    std::vector<std::size_t> idx(s->rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (sort == "name") {
      if (desc) std::reverse(idx.begin(), idx.end());
    } else {
      const auto& names = numeric_metric_names();
      if (std::find(names.begin(), names.end(), sort) == names.end())
        throw DomainError("unknown sort key '" + sort + "'");
      std::vector<std::optional<double>> key(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) key[i] = metric_value(s->rows[i], sort);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (!key[a] || !key[b]) return key[a].has_value() && !key[b].has_value();
        return desc ? *key[a] > *key[b] : *key[a] < *key[b];
      });
    }

    const auto page = paginate(q, idx.size());
    ordered_json out;
    out["total"] = idx.size();
    out["page"] = page.page;
    out["per_page"] = page.per_page;
    out["sort"] = sort;
    out["dir"] = dir;
    ordered_json rows = ordered_json::array();
    for (std::size_t i = page.begin; i < page.end; ++i)
      rows.push_back(row_json(s->rows[idx[i]], s->options.format));
    out["rows"] = std::move(rows);
    return Response{200, std::move(out)};
  });
}

Response QueryService::package(const std::string& name) const {
  return guarded([&] {
    const auto s = snapshot();
    const auto& g = s->graph;
    const NodeId p = g.id(name);
    ordered_json out = row_json(s->rows[p], s->options.format);

    ordered_json parents = ordered_json::array();
    for (NodeId a : g.parents(p)) parents.push_back({{"name", g.name(a)}, {"h", edge_h(*s, a, p)}});
    out["parents"] = std::move(parents);
    out["weak_parents"] = names_of(g, dependency_query(g, p, DependencyCategory::weak_parents));
    out["children"] = names_of(g, dependency_query(g, p, DependencyCategory::children));
    out["transmission_length"] = transmission_length(g, p);

    const auto& pair = s->table[p].mcohp.pair;
    if (pair) {
      const auto rel = classify_parent_pair(g, pair->first, pair->second, p);
      out["mcohp_relation"] = {
          {"kind", std::string(to_string(rel.kind))},
          {"witness", rel.witness ? ordered_json(g.name(*rel.witness)) : ordered_json(nullptr)}};
    } else {
      out["mcohp_relation"] = nullptr;
    }
    return Response{200, std::move(out)};
  });
}

Response QueryService::upstream(const std::string& name) const {
  return guarded([&] {
    const auto s = snapshot();
    const auto& g = s->graph;
    const NodeId p = g.id(name);
    const auto profile = upstream_profile(g, p);
    const auto dist = bfs_distances(g.strong(), p, false);

    ordered_json entries = ordered_json::array();
    for (const auto& [c, h_u] : profile.upstream_h) {
      ordered_json path = ordered_json::array();
      NodeId cur = c;
      path.push_back(g.name(cur));
      while (cur != p) {
        for (NodeId w : g.children(cur))
          if (dist[w] != kUnreachable && dist[w] + 1 == dist[cur]) {
            cur = w;
            break;
          }
        path.push_back(g.name(cur));
      }
      entries.push_back(
          {{"package", g.name(c)}, {"distance", dist[c]}, {"path", std::move(path)}, {"h_u", h_u}});
    }

    ordered_json nodes = ordered_json::array();
    ordered_json edges = ordered_json::array();
    const Bitset& up = g.upstream(p);
    auto inside = [&](NodeId v) { return v == p || up.test(v); };
    for (NodeId v = 0; v < g.size(); ++v) {
      if (!inside(v)) continue;
      nodes.push_back({{"name", g.name(v)}, {"repository", g.repository(v).label()}});
      if (v == p) continue;
      for (NodeId w : g.children(v))
        if (inside(w))
          edges.push_back({{"parent", g.name(v)}, {"child", g.name(w)}, {"h", edge_h(*s, v, w)}});
    }

    ordered_json out;
    out["package"] = g.name(p);
    out["n_strong"] = profile.n1;
    out["upstream"] = std::move(entries);
    out["graph"] = {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
    return Response{200, std::move(out)};
  });
}

Response QueryService::downstream(const std::string& name, const QueryParams& q) const {
  return guarded([&] {
    const auto s = snapshot();
    const auto& g = s->graph;
    const NodeId p = g.id(name);
    const auto range = depth_range(q);
    const auto tree = forward_tree(g.strong(), p);

    std::vector<NodeId> members;
    for (NodeId v = 0; v < g.size(); ++v)
      if (v != p && tree.dist[v] != kUnreachable && range.contains(tree.dist[v]))
        members.push_back(v);

    const auto page = paginate(q, members.size());
    ordered_json entries = ordered_json::array();
    for (std::size_t i = page.begin; i < page.end; ++i) {
      const NodeId b = members[i];
      std::vector<NodeId> rev;
      for (NodeId cur = b; cur != p; cur = tree.pred[cur]) rev.push_back(cur);
      rev.push_back(p);
      std::reverse(rev.begin(), rev.end());
      entries.push_back({{"package", g.name(b)},
                         {"distance", tree.dist[b]},
                         {"path", names_of(g, rev)},
                         {"h_u", heaviness_from_upstream(g, p, b)}});
    }
    ordered_json out;
    out["package"] = g.name(p);
    out["total"] = members.size();
    out["page"] = page.page;
    out["per_page"] = page.per_page;
    out["downstream"] = std::move(entries);
    return Response{200, std::move(out)};
  });
}

Response QueryService::downstream_graph(const std::string& name, const QueryParams& q) const {
  return guarded([&] {
    constexpr std::size_t kMaxNodes = 5000;
    const auto s = snapshot();
    const auto& g = s->graph;
    const NodeId p = g.id(name);
    const auto range = depth_range(q);
    const auto dist = bfs_distances(g.strong(), p, true);

    Subgraph sg;
    for (NodeId v = 0; v < g.size(); ++v)
      if (v == p || (dist[v] != kUnreachable && range.contains(dist[v]))) sg.nodes.push_back(v);
    if (sg.nodes.size() > kMaxNodes)
      return error(422, "downstream graph has " + std::to_string(sg.nodes.size()) +
                            " nodes; narrow it with min_depth/max_depth",
                   g.name(p));
    for (NodeId v : sg.nodes)
      for (NodeId w : g.children(v))
        if (sg.local_id(w)) sg.edges.push_back({{v, w}, edge_h(*s, v, w), 0.0});
    const auto bt = edge_betweenness(sg.local());
    for (std::size_t i = 0; i < sg.edges.size(); ++i) sg.edges[i].betweenness = bt[i];
    const auto cutoff = elbow_cutoff(bt);
    auto flagged = [&](double b) { return cutoff && b >= *cutoff; };

    // Leaves with a single in-subgraph parent collapse into one group node
    // per parent.
    std::vector<std::size_t> out_deg(sg.nodes.size(), 0), in_deg(sg.nodes.size(), 0);
    for (const auto& e : sg.edges) {
      ++out_deg[*sg.local_id(e.edge.parent)];
      ++in_deg[*sg.local_id(e.edge.child)];
    }
    auto grouped = [&](NodeId v) {
      const auto l = *sg.local_id(v);
      return v != p && out_deg[l] == 0 && in_deg[l] == 1;
    };

    struct Group {
      std::vector<NodeId> members;
      std::int64_t h = 0;
      double betweenness = 0;
      bool highlighted = false;
    };
    std::map<NodeId, Group> groups;
    ordered_json nodes = ordered_json::array();
    ordered_json edges = ordered_json::array();
    for (NodeId v : sg.nodes) {
      if (grouped(v)) continue;
      nodes.push_back({{"id", g.name(v)},
                       {"name", g.name(v)},
                       {"repository", g.repository(v).label()},
                       {"distance", dist[v]},
                       {"group", false}});
    }
    for (const auto& e : sg.edges) {
      if (grouped(e.edge.child)) {
        auto& grp = groups[e.edge.parent];
        grp.members.push_back(e.edge.child);
        grp.h += e.h;
        grp.betweenness += e.betweenness;
        grp.highlighted = grp.highlighted || flagged(e.betweenness);
        continue;
      }
      edges.push_back({{"parent", g.name(e.edge.parent)},
                       {"child", g.name(e.edge.child)},
                       {"h", e.h},
                       {"betweenness", round_to(e.betweenness, s->options.format.precision)},
                       {"highlighted", flagged(e.betweenness)}});
    }
    for (const auto& [parent, grp] : groups) {
      const std::string id = "group:" + g.name(parent);
      nodes.push_back({{"id", id},
                       {"parent", g.name(parent)},
                       {"members", names_of(g, grp.members)},
                       {"count", grp.members.size()},
                       {"group", true}});
      edges.push_back({{"parent", g.name(parent)},
                       {"child", id},
                       {"h", grp.h},
                       {"betweenness", round_to(grp.betweenness, s->options.format.precision)},
                       {"highlighted", grp.highlighted},
                       {"members", grp.members.size()}});
    }

    ordered_json out;
    out["package"] = g.name(p);
    out["min_depth"] = range.min;
    out["max_depth"] = q.count("max_depth") && !q.at("max_depth").empty() ? ordered_json(range.max)
                                                                           : ordered_json(nullptr);
    out["betweenness_cutoff"] = cutoff ? ordered_json(*cutoff) : ordered_json(nullptr);
    out["nodes"] = std::move(nodes);
    out["edges"] = std::move(edges);
    return Response{200, std::move(out)};
  });
}

Response QueryService::core_graph() const {
  return guarded([&] {
    const auto s = snapshot();
    ordered_json out;
    out["h_threshold"] = s->core.h_threshold;
    out["h_retained"] = s->core.h_retained;
    out["h_total"] = s->core.h_total;
    out["flow_fraction"] = s->core.flow_fraction();
    out["components"] = components(s->core.graph);
    out["graph"] = subgraph_json(s->graph, s->core.graph, s->options.format);
    return Response{200, std::move(out)};
  });
}

Response QueryService::key_paths() const {
  return guarded([&] {
    const auto s = snapshot();
    ordered_json out;
    out["bt_threshold"] = s->key.bt_threshold;
    out["bt_retained"] = s->key.bt_retained;
    out["bt_total"] = s->key.bt_total;
    out["flow_fraction"] = s->key.flow_fraction();
    out["graph"] = subgraph_json(s->graph, s->key.graph, s->options.format);
    return Response{200, std::move(out)};
  });
}

Response QueryService::summary() const {
  return guarded([&] {
    const auto s = snapshot();
    if (s->rows.empty()) return error(404, "snapshot has no packages");
    return Response{200, summary_json(s->summary, s->options.format)};
  });
}

Response QueryService::whatif(const std::string& body) const {
  return guarded([&] {
    const auto s = snapshot();
    const auto& g = s->graph;
    const auto req = nlohmann::json::parse(body);
    if (!req.is_object() || !req.contains("package") || !req["package"].is_string())
      throw DomainError("body needs a string 'package'");
    const NodeId p = g.id(req["package"].get<std::string>());
    std::vector<NodeId> demote;
    if (req.contains("demote")) {
      if (!req["demote"].is_array()) throw DomainError("'demote' must be an array of names");
      for (const auto& a : req["demote"]) {
        if (!a.is_string()) throw DomainError("'demote' must be an array of names");
        demote.push_back(g.id(a.get<std::string>()));
      }
    }
    std::sort(demote.begin(), demote.end());
    demote.erase(std::unique(demote.begin(), demote.end()), demote.end());
    const auto w = whatif_demote(g, p, demote);
    ordered_json out;
    out["package"] = g.name(p);
    out["demote"] = names_of(g, demote);
    out["old_count"] = w.old_count;
    out["new_count"] = w.new_count;
    out["reduced"] = names_of(g, w.reduced);
    return Response{200, std::move(out)};
  });
}

Response QueryService::reload() {
  return guarded([&] {
    if (!loader_) return error(501, "no snapshot source configured");
    auto fresh = loader_();
    const auto n = fresh->graph.size();
    replace(std::move(fresh));
    ordered_json out;
    out["status"] = "reloaded";
    out["packages"] = n;
    return Response{200, std::move(out)};
  });
}

// ------------------------------------------------------------------- HTTP

struct HttpFrontend::Impl {
  explicit Impl(QueryService& s) : service(s) {}
  QueryService& service;
  httplib::Server server;
};

namespace {

QueryParams params_of(const httplib::Request& req) {
  QueryParams q;
  for (const auto& [k, v] : req.params) q[k] = v;
  return q;
}

void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

HttpFrontend::HttpFrontend(QueryService& service, std::string ui_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  auto& svc = impl_->service;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  srv.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Get("/packages", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.packages(params_of(req)));
  });
  srv.Get(R"(/package/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.package(req.matches[1]));
  });
  srv.Get(R"(/package/([^/]+)/upstream)",
          [&svc](const httplib::Request& req, httplib::Response& res) {
            send(res, svc.upstream(req.matches[1]));
          });
  srv.Get(R"(/package/([^/]+)/downstream)",
          [&svc](const httplib::Request& req, httplib::Response& res) {
            send(res, svc.downstream(req.matches[1], params_of(req)));
          });
  srv.Get(R"(/package/([^/]+)/downstream-graph)",
          [&svc](const httplib::Request& req, httplib::Response& res) {
            send(res, svc.downstream_graph(req.matches[1], params_of(req)));
          });
  srv.Get("/core-graph", [&svc](const httplib::Request&, httplib::Response& res) {
    send(res, svc.core_graph());
  });
  srv.Get("/key-paths", [&svc](const httplib::Request&, httplib::Response& res) {
    send(res, svc.key_paths());
  });
  srv.Get("/summary", [&svc](const httplib::Request&, httplib::Response& res) {
    send(res, svc.summary());
  });
  srv.Post("/whatif", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.whatif(req.body));
  });
  srv.Post("/reload", [&svc](const httplib::Request&, httplib::Response& res) {
    send(res, svc.reload());
  });

  if (!ui_dir.empty() && !srv.set_mount_point("/ui", ui_dir))
    throw IoError("cannot serve UI directory '" + ui_dir + "'");

  srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    ordered_json body = {{"error", "no route for " + req.method + " " + req.path},
                         {"package", nullptr}};
    res.set_content(body.dump(), "application/json");
  });
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int bound = srv.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!srv.bind_to_port(host, port))
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpFrontend::listen() {
  impl_->server.listen_after_bind();
}

void HttpFrontend::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace depheavy
