// Metric graphs with delta-type vertex conditions and the surgeries
// (parameter change, glue, cut, cycle removal) used by the spectral and
// nodal machinery.  Graph values are immutable; every surgery returns a
// new graph.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nodalscope {

/// Error raised for invalid input documents or misused operations.
class graph_error : public std::runtime_error {
 public:
  explicit graph_error(const std::string& what) : std::runtime_error(what) {}
};

enum class ConditionKind { Neumann, Dirichlet, Delta };

/// Delta-type vertex condition: continuity plus sum of inward derivatives
/// equal to alpha * f(v).  Neumann is alpha = 0, Dirichlet is alpha = inf.
/// Dirichlet is kept as its own variant; its vertex scattering matrix has
/// an exact closed form that a large finite alpha would only approximate.
struct VertexCondition {
  ConditionKind kind = ConditionKind::Neumann;
  double alpha = 0.0;  // meaningful for Delta only

  static VertexCondition neumann() { return {ConditionKind::Neumann, 0.0}; }
  static VertexCondition dirichlet() { return {ConditionKind::Dirichlet, 0.0}; }
  static VertexCondition delta(double alpha) {
    if (!std::isfinite(alpha)) throw graph_error("delta condition requires finite alpha");
    if (alpha == 0.0) return neumann();  // canonicalization Delta(0) -> Neumann
    return {ConditionKind::Delta, alpha};
  }

  bool is_dirichlet() const { return kind == ConditionKind::Dirichlet; }
  /// alpha value with Neumann canonicalized to 0 (valid for non-Dirichlet).
  double alpha_value() const {
    return kind == ConditionKind::Delta ? alpha : 0.0;
  }
  bool operator==(const VertexCondition& o) const {
    return kind == o.kind && (kind != ConditionKind::Delta || alpha == o.alpha);
  }
};

struct Vertex {
  std::string id;
  VertexCondition condition;
};

/// Edge between vertex indices u and v (self-loops and parallel edges are
/// allowed; a self-loop contributes two coordinates at the same vertex).
struct Edge {
  std::string id;
  int u = -1;
  int v = -1;
  double length = 0.0;
};

/// A point on an edge, offset measured from the edge's `u` endpoint.
struct GraphPoint {
  std::string edge;
  double offset = 0.0;
};

class MetricGraph {
 public:
  MetricGraph(std::vector<Vertex> vertices, std::vector<Edge> edges)
      : vertices_(std::move(vertices)), edges_(std::move(edges)) {
    validate();
  }

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Vertex& vertex(int i) const { return vertices_.at(i); }
  const Edge& edge(int i) const { return edges_.at(i); }

  int vertex_index(const std::string& id) const {
    for (int i = 0; i < vertex_count(); ++i)
      if (vertices_[i].id == id) return i;
    throw graph_error("unknown vertex id '" + id + "'");
  }
  int edge_index(const std::string& id) const {
    for (int i = 0; i < edge_count(); ++i)
      if (edges_[i].id == id) return i;
    throw graph_error("unknown edge id '" + id + "'");
  }
  bool has_vertex(const std::string& id) const {
    for (const auto& v : vertices_)
      if (v.id == id) return true;
    return false;
  }
  bool has_edge(const std::string& id) const {
    for (const auto& e : edges_)
      if (e.id == id) return true;
    return false;
  }

  /// Degree of vertex i; a self-loop counts twice.
  int degree(int i) const {
    int d = 0;
    for (const auto& e : edges_) {
      if (e.u == i) ++d;
      if (e.v == i) ++d;
    }
    return d;
  }

  double total_length() const {
    double s = 0.0;
    for (const auto& e : edges_) s += e.length;
    return s;
  }

  /// Connected-component label per vertex, labels are 0..count-1 in order
  /// of first appearance.
  std::vector<int> component_labels() const {
    std::vector<int> label(vertices_.size(), -1);
    int next = 0;
    for (int s = 0; s < vertex_count(); ++s) {
      if (label[s] >= 0) continue;
      std::vector<int> stack{s};
      label[s] = next;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& e : edges_) {
          for (int w : {e.u == v ? e.v : -1, e.v == v ? e.u : -1}) {
            if (w >= 0 && label[w] < 0) {
              label[w] = next;
              stack.push_back(w);
            }
          }
        }
      }
      ++next;
    }
    return label;
  }

  int component_count() const {
    auto l = component_labels();
    return l.empty() ? 0 : 1 + *std::max_element(l.begin(), l.end());
  }

  bool connected() const { return component_count() <= 1; }

  bool has_dirichlet_vertex() const {
    for (const auto& v : vertices_)
      if (v.condition.is_dirichlet()) return true;
    return false;
  }

  /// Fresh id with the given prefix, never colliding with existing ids.
  std::string fresh_vertex_id(const std::string& prefix) const {
    for (int n = 0;; ++n) {
      std::string id = prefix + (n == 0 ? "" : "_" + std::to_string(n));
      if (!has_vertex(id)) return id;
    }
  }
  std::string fresh_edge_id(const std::string& prefix) const {
    for (int n = 0;; ++n) {
      std::string id = prefix + (n == 0 ? "" : "_" + std::to_string(n));
      if (!has_edge(id)) return id;
    }
  }

 private:
  void validate() const {
    std::set<std::string> vids, eids;
    for (const auto& v : vertices_) {
      if (v.id.empty()) throw graph_error("empty vertex id");
      if (!vids.insert(v.id).second) throw graph_error("duplicate vertex id '" + v.id + "'");
    }
    for (const auto& e : edges_) {
      if (e.id.empty()) throw graph_error("empty edge id");
      if (!eids.insert(e.id).second) throw graph_error("duplicate edge id '" + e.id + "'");
      if (e.u < 0 || e.u >= vertex_count() || e.v < 0 || e.v >= vertex_count())
        throw graph_error("edge '" + e.id + "': dangling endpoint reference");
      if (!(e.length > 0.0) || !std::isfinite(e.length))
        throw graph_error("edge '" + e.id + "': nonpositive length");
    }
    for (int i = 0; i < vertex_count(); ++i)
      if (degree(i) == 0)
        throw graph_error("vertex '" + vertices_[i].id + "' is isolated");
  }

  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
};

// ---------------------------------------------------------------------------
// Graph document parsing (schema "nodalscope-graph-v1")

inline VertexCondition condition_from_json(const nlohmann::json& j, const std::string& vid) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "neumann") return VertexCondition::neumann();
    if (s == "dirichlet") return VertexCondition::dirichlet();
    throw graph_error("vertex '" + vid + "': unknown condition '" + s + "'");
  }
  if (j.is_object() && j.contains("delta") && j["delta"].is_number())
    return VertexCondition::delta(j["delta"].get<double>());
  throw graph_error("vertex '" + vid + "': malformed condition");
}

inline nlohmann::json condition_to_json(const VertexCondition& c) {
  switch (c.kind) {
    case ConditionKind::Neumann: return "neumann";
    case ConditionKind::Dirichlet: return "dirichlet";
    case ConditionKind::Delta: return nlohmann::json{{"delta", c.alpha}};
  }
  return nullptr;
}

inline MetricGraph graph_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw graph_error("malformed document: not an object");
  if (!doc.contains("format") || doc["format"] != "nodalscope-graph-v1")
    throw graph_error("malformed document: missing or unsupported format field");
  if (!doc.contains("vertices") || !doc["vertices"].is_array() ||
      !doc.contains("edges") || !doc["edges"].is_array())
    throw graph_error("malformed document: wants arrays 'vertices' and 'edges'");

  std::vector<Vertex> vertices;
  for (const auto& jv : doc["vertices"]) {
    if (!jv.is_object() || !jv.contains("id") || !jv["id"].is_string())
      throw graph_error("malformed vertex entry: missing id");
    const std::string id = jv["id"].get<std::string>();
    if (!jv.contains("condition"))
      throw graph_error("vertex '" + id + "': missing condition");
    vertices.push_back({id, condition_from_json(jv["condition"], id)});
  }

  auto vindex = [&](const std::string& id, const std::string& eid) {
    for (int i = 0; i < static_cast<int>(vertices.size()); ++i)
      if (vertices[i].id == id) return i;
    throw graph_error("edge '" + eid + "': dangling endpoint reference '" + id + "'");
  };

  std::vector<Edge> edges;
  for (const auto& je : doc["edges"]) {
    if (!je.is_object() || !je.contains("id") || !je["id"].is_string())
      throw graph_error("malformed edge entry: missing id");
    const std::string id = je["id"].get<std::string>();
    if (!je.contains("from") || !je.contains("to") || !je.contains("length") ||
        !je["from"].is_string() || !je["to"].is_string() || !je["length"].is_number())
      throw graph_error("edge '" + id + "': wants from, to and numeric length");
    edges.push_back({id, vindex(je["from"].get<std::string>(), id),
                     vindex(je["to"].get<std::string>(), id), je["length"].get<double>()});
  }
  return MetricGraph(std::move(vertices), std::move(edges));
}

inline MetricGraph parse_graph(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw graph_error(std::string("malformed document: ") + e.what());
  }
  return graph_from_json(doc);
}

inline nlohmann::json graph_to_json(const MetricGraph& g) {
  nlohmann::json jv = nlohmann::json::array(), je = nlohmann::json::array();
  for (const auto& v : g.vertices())
    jv.push_back({{"id", v.id}, {"condition", condition_to_json(v.condition)}});
  for (const auto& e : g.edges())
    je.push_back({{"id", e.id}, {"from", g.vertex(e.u).id},
                  {"to", g.vertex(e.v).id}, {"length", e.length}});
  return {{"format", "nodalscope-graph-v1"}, {"vertices", jv}, {"edges", je}};
}

// ---------------------------------------------------------------------------
// Topology

/// First Betti number |E| - |V| + (number of components).
inline int cyclomatic_number(const MetricGraph& g) {
  return g.edge_count() - g.vertex_count() + g.component_count();
}

// ---------------------------------------------------------------------------
// Surgeries

inline MetricGraph change_vertex_parameter(const MetricGraph& g, const std::string& vid,
                                           VertexCondition c) {
  int i = g.vertex_index(vid);
  auto vs = g.vertices();
  vs[i].condition = c;
  return MetricGraph(std::move(vs), g.edges());
}

/// Glue two distinct delta-type vertices; the parameters add.  Dirichlet
/// participants are rejected (the join theorem is stated for finite alpha).
inline MetricGraph glue_vertices(const MetricGraph& g, const std::string& id0,
                                 const std::string& id1) {
  if (id0 == id1) throw graph_error("glue_vertices: identical ids '" + id0 + "'");
  int i0 = g.vertex_index(id0), i1 = g.vertex_index(id1);
  const auto& c0 = g.vertex(i0).condition;
  const auto& c1 = g.vertex(i1).condition;
  if (c0.is_dirichlet() || c1.is_dirichlet())
    throw graph_error("glue_vertices: Dirichlet vertex cannot be glued");
  if (i0 > i1) std::swap(i0, i1);

  std::vector<Vertex> vs;
  std::vector<int> remap(g.vertex_count());
  for (int i = 0; i < g.vertex_count(); ++i) {
    if (i == i1) {
      remap[i] = remap[i0];
      continue;
    }
    remap[i] = static_cast<int>(vs.size());
    vs.push_back(g.vertex(i));
  }
  vs[remap[i0]].condition =
      VertexCondition::delta(c0.alpha_value() + c1.alpha_value());

  auto es = g.edges();
  for (auto& e : es) {
    e.u = remap[e.u];
    e.v = remap[e.v];
  }
  return MetricGraph(std::move(vs), std::move(es));
}

/// Cut an edge at a strictly interior point.  The two new degree-1 vertices
/// carry Delta(alpha_left) on the u-side piece and Delta(alpha_right) on the
/// v-side piece.  The result may be disconnected.
inline MetricGraph cut_at_point(const MetricGraph& g, const GraphPoint& p,
                                double alpha_left, double alpha_right) {
  int ei = g.edge_index(p.edge);
  const Edge e = g.edge(ei);
  if (!(p.offset > 0.0 && p.offset < e.length))
    throw graph_error("cut_at_point: offset must be strictly interior to edge '" + p.edge + "'");

  auto vs = g.vertices();
  const std::string lid = g.fresh_vertex_id(e.id + "#cutL");
  const std::string rid = g.fresh_vertex_id(e.id + "#cutR");
  vs.push_back({lid, VertexCondition::delta(alpha_left)});
  vs.push_back({rid, VertexCondition::delta(alpha_right)});
  int li = static_cast<int>(vs.size()) - 2, ri = li + 1;

  auto es = g.edges();
  es[ei] = {e.id + "#a", e.u, li, p.offset};
  es.push_back({e.id + "#b", ri, e.v, e.length - p.offset});
  return MetricGraph(std::move(vs), std::move(es));
}

/// Split an edge at a strictly interior point with a new degree-2 vertex.
/// With a Neumann condition the spectrum is unchanged.
inline std::pair<MetricGraph, std::string> insert_degree2_vertex(const MetricGraph& g,
                                                                 const GraphPoint& p,
                                                                 VertexCondition c) {
  int ei = g.edge_index(p.edge);
  const Edge e = g.edge(ei);
  if (!(p.offset > 0.0 && p.offset < e.length))
    throw graph_error("insert_degree2_vertex: offset must be strictly interior to edge '" +
                      p.edge + "'");

  auto vs = g.vertices();
  const std::string mid = g.fresh_vertex_id(e.id + "#mid");
  vs.push_back({mid, c});
  int mi = static_cast<int>(vs.size()) - 1;

  auto es = g.edges();
  es[ei] = {e.id + "#a", e.u, mi, p.offset};
  es.push_back({e.id + "#b", mi, e.v, e.length - p.offset});
  return {MetricGraph(std::move(vs), std::move(es)), mid};
}

namespace detail {
/// Check that the listed edge indices form a single simple cycle: the edge
/// set is connected and every touched vertex has degree exactly 2 in it.
inline bool is_simple_cycle(const MetricGraph& g, const std::vector<int>& eidx) {
  if (eidx.empty()) return false;
  std::map<int, int> deg;
  for (int ei : eidx) {
    const auto& e = g.edge(ei);
    deg[e.u] += 1;
    deg[e.v] += 1;
  }
  for (const auto& [v, d] : deg)
    if (d != 2) return false;
  // connectivity over the cycle edges only
  std::set<int> seen;
  std::vector<int> stack{g.edge(eidx.front()).u};
  seen.insert(stack.front());
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int ei : eidx) {
      const auto& e = g.edge(ei);
      if (e.u == v && !seen.count(e.v)) { seen.insert(e.v); stack.push_back(e.v); }
      if (e.v == v && !seen.count(e.u)) { seen.insert(e.u); stack.push_back(e.u); }
    }
  }
  return seen.size() == deg.size();
}
}  // namespace detail

/// Delete the given simple cycle; every vertex that was on the cycle and
/// still has incident edges becomes Dirichlet.  This is the graph whose
/// counting function enters the single-cycle nodal formula.
inline MetricGraph remove_cycle_dirichlet(const MetricGraph& g,
                                          const std::vector<std::string>& cycle) {
  std::vector<int> eidx;
  for (const auto& id : cycle) eidx.push_back(g.edge_index(id));
  if (!detail::is_simple_cycle(g, eidx))
    throw graph_error("remove_cycle_dirichlet: edge list is not a simple cycle");

  std::set<int> removed(eidx.begin(), eidx.end());
  std::set<int> cycle_vertices;
  for (int ei : eidx) {
    cycle_vertices.insert(g.edge(ei).u);
    cycle_vertices.insert(g.edge(ei).v);
  }

  std::vector<Edge> kept;
  for (int i = 0; i < g.edge_count(); ++i)
    if (!removed.count(i)) kept.push_back(g.edge(i));

  // vertices that keep at least one edge survive
  std::vector<char> used(g.vertex_count(), 0);
  for (const auto& e : kept) used[e.u] = used[e.v] = 1;

  std::vector<Vertex> vs;
  std::vector<int> remap(g.vertex_count(), -1);
  for (int i = 0; i < g.vertex_count(); ++i) {
    if (!used[i]) continue;
    remap[i] = static_cast<int>(vs.size());
    Vertex v = g.vertex(i);
    if (cycle_vertices.count(i)) v.condition = VertexCondition::dirichlet();
    vs.push_back(v);
  }
  for (auto& e : kept) {
    e.u = remap[e.u];
    e.v = remap[e.v];
  }
  if (vs.empty()) throw graph_error("remove_cycle_dirichlet: nothing remains");
  return MetricGraph(std::move(vs), std::move(kept));
}

/// All simple cycles of g, required to be pairwise vertex-disjoint (the
/// disjoint-cycles formula covers exactly that case).  Cycles are returned
/// as lists of edge ids.
inline std::vector<std::vector<std::string>> find_cycles(const MetricGraph& g) {
  // spanning forest; each non-tree edge closes one fundamental cycle
  std::vector<int> parent_vertex(g.vertex_count(), -1);
  std::vector<int> parent_edge(g.vertex_count(), -1);
  std::vector<char> in_tree_edge(g.edge_count(), 0);
  std::vector<char> visited(g.vertex_count(), 0);
  for (int s = 0; s < g.vertex_count(); ++s) {
    if (visited[s]) continue;
    visited[s] = 1;
    std::vector<int> stack{s};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int ei = 0; ei < g.edge_count(); ++ei) {
        const auto& e = g.edge(ei);
        int w = e.u == v ? e.v : (e.v == v ? e.u : -1);
        if (w < 0 || visited[w]) continue;
        visited[w] = 1;
        parent_vertex[w] = v;
        parent_edge[w] = ei;
        in_tree_edge[ei] = 1;
        stack.push_back(w);
      }
    }
  }

  auto tree_path = [&](int a, int b) {
    // edge indices along the unique tree path a..b
    auto root_path = [&](int v) {
      std::vector<int> vs{v};
      while (parent_vertex[vs.back()] >= 0) vs.push_back(parent_vertex[vs.back()]);
      return vs;
    };
    auto pa = root_path(a), pb = root_path(b);
    std::set<int> in_pa(pa.begin(), pa.end());
    int meet = -1;
    for (int v : pb)
      if (in_pa.count(v)) { meet = v; break; }
    std::vector<int> edges;
    for (int v = a; v != meet; v = parent_vertex[v]) edges.push_back(parent_edge[v]);
    std::vector<int> back;
    for (int v = b; v != meet; v = parent_vertex[v]) back.push_back(parent_edge[v]);
    edges.insert(edges.end(), back.rbegin(), back.rend());
    return edges;
  };

  std::vector<std::vector<int>> cycles;
  for (int ei = 0; ei < g.edge_count(); ++ei) {
    if (in_tree_edge[ei]) continue;
    const auto& e = g.edge(ei);
    std::vector<int> cyc = e.u == e.v ? std::vector<int>{} : tree_path(e.u, e.v);
    cyc.push_back(ei);
    cycles.push_back(std::move(cyc));
  }

  // pairwise vertex-disjointness
  std::vector<std::set<int>> cycle_vertices;
  for (const auto& cyc : cycles) {
    std::set<int> vs;
    for (int ei : cyc) {
      vs.insert(g.edge(ei).u);
      vs.insert(g.edge(ei).v);
    }
    cycle_vertices.push_back(std::move(vs));
  }
  for (size_t i = 0; i < cycles.size(); ++i)
    for (size_t j = i + 1; j < cycles.size(); ++j)
      for (int v : cycle_vertices[i])
        if (cycle_vertices[j].count(v))
          throw graph_error("find_cycles: cycles not disjoint (shared vertex '" +
                            g.vertex(v).id + "')");

  std::vector<std::vector<std::string>> out;
  for (const auto& cyc : cycles) {
    std::vector<std::string> ids;
    for (int ei : cyc) ids.push_back(g.edge(ei).id);
    out.push_back(std::move(ids));
  }
  return out;
}

}  // namespace nodalscope
