// Builders for the named test graphs and the builtin registry used by the
// command-line harness.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "nodalscope/graph.hpp"

namespace nodalscope {

/// Interval of length L with the given end conditions ("v0" -- "e0" -- "v1").
inline MetricGraph make_interval(double length, VertexCondition left,
                                 VertexCondition right) {
  return MetricGraph({{"v0", left}, {"v1", right}},
                     {{"e0", 0, 1, length}});
}

/// Circle of circumference L realized as a self-loop on one Neumann vertex.
inline MetricGraph make_circle(double length) {
  return MetricGraph({{"v0", VertexCondition::neumann()}},
                     {{"loop", 0, 0, length}});
}

/// Star with the given arm lengths; arm tips get `tip` conditions, the
/// center is Neumann.  Vertices: "c", "t1".."tN"; edges "a1".."aN".
inline MetricGraph make_star(const std::vector<double>& arms,
                             const std::vector<VertexCondition>& tips) {
  std::vector<Vertex> vs{{"c", VertexCondition::neumann()}};
  std::vector<Edge> es;
  for (size_t i = 0; i < arms.size(); ++i) {
    vs.push_back({"t" + std::to_string(i + 1), tips.at(i)});
    es.push_back({"a" + std::to_string(i + 1), 0, static_cast<int>(i + 1), arms[i]});
  }
  return MetricGraph(std::move(vs), std::move(es));
}

/// Lasso: a loop of the given length attached at "v0" plus a pendant edge
/// "stick" from "v0" to the Neumann tip "v1".
inline MetricGraph make_lasso(double loop_length = 1.0,
                              double stick_length = 0.707106781186547524) {
  return MetricGraph({{"v0", VertexCondition::neumann()},
                      {"v1", VertexCondition::neumann()}},
                     {{"loop", 0, 0, loop_length},
                      {"stick", 0, 1, stick_length}});
}

/// Dumbbell: two loops joined by a path edge; the two cycles are vertex
/// disjoint.
inline MetricGraph make_dumbbell(double loop0 = 1.0, double loop1 = 0.577350269189625765,
                                 double bar = 0.782794100389228031) {
  return MetricGraph({{"v0", VertexCondition::neumann()},
                      {"v1", VertexCondition::neumann()}},
                     {{"loop0", 0, 0, loop0},
                      {"bar", 0, 1, bar},
                      {"loop1", 1, 1, loop1}});
}

/// Chain of three disjoint loops linked by two path edges.
inline MetricGraph make_cycle_chain3() {
  return MetricGraph({{"v0", VertexCondition::neumann()},
                      {"v1", VertexCondition::neumann()},
                      {"v2", VertexCondition::neumann()}},
                     {{"loop0", 0, 0, 0.913213089317212},
                      {"bar01", 0, 1, 0.641135412836029},
                      {"loop1", 1, 1, 0.577350269189626},
                      {"bar12", 1, 2, 0.703412911342185},
                      {"loop2", 2, 2, 0.431662479035540}});
}

/// Edge lengths of the dihedral family: a cycle made of edges 2b and 2c
/// between "u" and "w", a pendant of length a at "u" ending Dirichlet and a
/// pendant of length a at "w" ending Neumann.  Total length 2(a+b+c).
struct DihedralParams {
  double a = 1.0;
  double b = 0.707106781186547524;  // 1/sqrt(2)
  double c = 0.577350269189625765;  // 1/sqrt(3)

  double alpha() const { return (b + c) / (a + b + c); }
  double total_length() const { return 2.0 * (a + b + c); }
};

inline MetricGraph make_dihedral(const DihedralParams& p = {}) {
  if (!(p.a > 0 && p.b > 0 && p.c > 0))
    throw graph_error("dihedral parameters must be positive");
  return MetricGraph({{"vD", VertexCondition::dirichlet()},
                      {"u", VertexCondition::neumann()},
                      {"w", VertexCondition::neumann()},
                      {"vN", VertexCondition::neumann()}},
                     {{"tailD", 0, 1, p.a},
                      {"cycB", 1, 2, 2.0 * p.b},
                      {"cycC", 1, 2, 2.0 * p.c},
                      {"tailN", 2, 3, p.a}});
}

/// The tree isospectral to the dihedral graph: a central edge of length 2a
/// whose one junction carries pendants b and c with Dirichlet tips and whose
/// other junction carries pendants b and c with Neumann tips.  The test
/// suite asserts the isospectrality numerically.
inline MetricGraph make_tree_twin(const DihedralParams& p = {}) {
  if (!(p.a > 0 && p.b > 0 && p.c > 0))
    throw graph_error("tree twin parameters must be positive");
  return MetricGraph({{"x", VertexCondition::neumann()},
                      {"y", VertexCondition::neumann()},
                      {"bD", VertexCondition::dirichlet()},
                      {"cD", VertexCondition::dirichlet()},
                      {"bN", VertexCondition::neumann()},
                      {"cN", VertexCondition::neumann()}},
                     {{"mid", 0, 1, 2.0 * p.a},
                      {"pbD", 0, 2, p.b},
                      {"pcD", 0, 3, p.c},
                      {"pbN", 1, 4, p.b},
                      {"pcN", 1, 5, p.c}});
}

/// Builtin registry for the CLI.  Unknown names raise graph_error.
inline MetricGraph make_builtin(const std::string& name, const DihedralParams& p = {}) {
  if (name == "interval")
    return make_interval(1.0, VertexCondition::dirichlet(), VertexCondition::dirichlet());
  if (name == "lasso") return make_lasso();
  if (name == "dumbbell") return make_dumbbell();
  if (name == "dihedral") return make_dihedral(p);
  if (name == "tree-twin") return make_tree_twin(p);
  throw graph_error("unknown builtin graph '" + name + "'");
}

}  // namespace nodalscope
