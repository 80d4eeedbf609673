#include <catch2/catch_amalgamated.hpp>

#include "nodalscope/builtins.hpp"
#include "nodalscope/graph.hpp"

#include "helpers.hpp"

using namespace nodalscope;

static const char* kIntervalDoc = R"({
  "format": "nodalscope-graph-v1",
  "vertices": [
    {"id": "l", "condition": "dirichlet"},
    {"id": "r", "condition": "dirichlet"}
  ],
  "edges": [{"id": "e", "from": "l", "to": "r", "length": 1.0}]
})";

TEST_CASE("parse_graph accepts the smallest valid graph") {
  MetricGraph g = parse_graph(kIntervalDoc);
  CHECK(g.vertex_count() == 2);
  CHECK(g.edge_count() == 1);
  CHECK(g.vertex(0).condition.is_dirichlet());
}

TEST_CASE("parse_graph reads a one-tail cycle description") {
  // edge a plus a cycle of edges 2b and 2c, one Dirichlet end, Neumann
  // elsewhere
  const char* doc = R"({
    "format": "nodalscope-graph-v1",
    "vertices": [
      {"id": "vD", "condition": "dirichlet"},
      {"id": "u", "condition": "neumann"},
      {"id": "w", "condition": "neumann"}
    ],
    "edges": [
      {"id": "a", "from": "vD", "to": "u", "length": 1.0},
      {"id": "b", "from": "u", "to": "w", "length": 1.4142135623731},
      {"id": "c", "from": "u", "to": "w", "length": 1.1547005383793}
    ]
  })";
  MetricGraph g = parse_graph(doc);
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 3);
  CHECK(cyclomatic_number(g) == 1);
}

TEST_CASE("parse_graph rejects bad documents with the offending id") {
  const char* negative = R"({
    "format": "nodalscope-graph-v1",
    "vertices": [
      {"id": "l", "condition": "neumann"},
      {"id": "r", "condition": "neumann"}
    ],
    "edges": [{"id": "bad", "from": "l", "to": "r", "length": -1.0}]
  })";
  CHECK_THROWS_WITH(parse_graph(negative),
                    Catch::Matchers::ContainsSubstring("nonpositive length"));
  CHECK_THROWS_WITH(parse_graph("{ not json"),
                    Catch::Matchers::ContainsSubstring("malformed document"));
  const char* dangling = R"({
    "format": "nodalscope-graph-v1",
    "vertices": [{"id": "l", "condition": "neumann"}],
    "edges": [{"id": "e", "from": "l", "to": "ghost", "length": 1.0}]
  })";
  CHECK_THROWS_WITH(parse_graph(dangling),
                    Catch::Matchers::ContainsSubstring("dangling endpoint"));
}

TEST_CASE("condition canonicalization") {
  CHECK(VertexCondition::delta(0.0) == VertexCondition::neumann());
  CHECK_THROWS_AS(VertexCondition::delta(std::numeric_limits<double>::infinity()),
                  graph_error);
}

TEST_CASE("cyclomatic number") {
  MetricGraph path({{"a", VertexCondition::neumann()},
                    {"b", VertexCondition::neumann()},
                    {"c", VertexCondition::neumann()},
                    {"d", VertexCondition::neumann()}},
                   {{"e0", 0, 1, 1.0}, {"e1", 1, 2, 1.0}, {"e2", 2, 3, 1.0}});
  CHECK(cyclomatic_number(path) == 0);
  CHECK(cyclomatic_number(make_dihedral()) == 1);

  MetricGraph fig8({{"o", VertexCondition::neumann()}},
                   {{"l0", 0, 0, 1.0}, {"l1", 0, 0, 0.7}});
  CHECK(cyclomatic_number(fig8) == 2);
}

TEST_CASE("cyclomatic number is |E|-|V|+1 on random connected graphs") {
  std::mt19937 rng(42);
  for (int t = 0; t < 50; ++t) {
    testutil::RandomGraphOptions opt;
    opt.beta = t % 3;
    MetricGraph g = testutil::random_graph(rng, opt);
    REQUIRE(g.connected());
    CHECK(cyclomatic_number(g) == g.edge_count() - g.vertex_count() + 1);
  }
}

TEST_CASE("change_vertex_parameter") {
  MetricGraph g = make_interval(1.0, VertexCondition::neumann(), VertexCondition::neumann());
  MetricGraph h = change_vertex_parameter(g, "v0", VertexCondition::dirichlet());
  CHECK(h.vertex(0).condition.is_dirichlet());
  CHECK(g.vertex(0).condition.kind == ConditionKind::Neumann);  // g untouched

  MetricGraph d1 = change_vertex_parameter(g, "v1", VertexCondition::delta(2.0));
  MetricGraph d2 = change_vertex_parameter(d1, "v1", VertexCondition::delta(5.0));
  CHECK(d2.vertex(1).condition.alpha == 5.0);
  CHECK(d2.edge_count() == g.edge_count());

  CHECK_THROWS_AS(change_vertex_parameter(g, "nope", VertexCondition::neumann()),
                  graph_error);
}

TEST_CASE("glue_vertices") {
  // gluing the free ends of a path makes a cycle
  MetricGraph path({{"a", VertexCondition::neumann()},
                    {"b", VertexCondition::neumann()},
                    {"c", VertexCondition::neumann()}},
                   {{"e0", 0, 1, 1.0}, {"e1", 1, 2, 1.0}});
  MetricGraph cyc = glue_vertices(path, "a", "c");
  CHECK(cyclomatic_number(cyc) == cyclomatic_number(path) + 1);

  MetricGraph g({{"a", VertexCondition::delta(1.0)},
                 {"b", VertexCondition::delta(2.5)},
                 {"c", VertexCondition::neumann()}},
                {{"e0", 0, 2, 1.0}, {"e1", 1, 2, 1.0}});
  MetricGraph h = glue_vertices(g, "a", "b");
  CHECK(h.vertex_count() == 2);
  int merged = h.vertex_index("a");
  CHECK(h.vertex(merged).condition.kind == ConditionKind::Delta);
  CHECK(h.vertex(merged).condition.alpha == Catch::Approx(3.5));

  CHECK_THROWS_AS(glue_vertices(g, "a", "a"), graph_error);
  MetricGraph d = change_vertex_parameter(g, "a", VertexCondition::dirichlet());
  CHECK_THROWS_AS(glue_vertices(d, "a", "b"), graph_error);
}

TEST_CASE("cut_at_point") {
  MetricGraph g = make_interval(1.0, VertexCondition::neumann(), VertexCondition::neumann());
  MetricGraph cut = cut_at_point(g, {"e0", 0.3}, 0.0, 0.0);
  CHECK(cut.edge_count() == 2);
  CHECK(cut.component_count() == 2);
  std::vector<double> lens{cut.edge(0).length, cut.edge(1).length};
  std::sort(lens.begin(), lens.end());
  CHECK(lens[0] == Catch::Approx(0.3));
  CHECK(lens[1] == Catch::Approx(0.7));

  MetricGraph lasso = make_lasso();
  MetricGraph lc = cut_at_point(lasso, {"stick", 0.5}, 0.0, 0.0);
  CHECK(lc.component_count() == 2);
  CHECK(cyclomatic_number(lc) == 1);  // the loop part keeps its cycle

  CHECK_THROWS_AS(cut_at_point(g, {"e0", 0.0}, 0.0, 0.0), graph_error);
  CHECK_THROWS_AS(cut_at_point(g, {"e0", 1.0}, 0.0, 0.0), graph_error);
}

TEST_CASE("insert_degree2_vertex") {
  MetricGraph g = make_interval(1.0, VertexCondition::dirichlet(), VertexCondition::dirichlet());
  auto [h, vid] = insert_degree2_vertex(g, {"e0", 0.5}, VertexCondition::dirichlet());
  CHECK(h.vertex_count() == 3);
  CHECK(h.degree(h.vertex_index(vid)) == 2);
  CHECK_THROWS_AS(insert_degree2_vertex(g, {"e0", 1.0}, VertexCondition::neumann()),
                  graph_error);
}

TEST_CASE("remove_cycle_dirichlet") {
  MetricGraph lasso = make_lasso();
  MetricGraph r = remove_cycle_dirichlet(lasso, {"loop"});
  CHECK(r.edge_count() == 1);
  CHECK(r.vertex_count() == 2);
  // the cut end turned Dirichlet, the free end kept its condition
  CHECK(r.vertex(r.vertex_index("v0")).condition.is_dirichlet());
  CHECK(r.vertex(r.vertex_index("v1")).condition.kind == ConditionKind::Neumann);
  CHECK(cyclomatic_number(r) == cyclomatic_number(lasso) - 1);

  MetricGraph d = make_dihedral();
  MetricGraph rd = remove_cycle_dirichlet(d, {"cycB", "cycC"});
  CHECK(rd.edge_count() == 2);
  CHECK(rd.component_count() == 2);
  // one interval is Dirichlet-Dirichlet, the other Dirichlet-Neumann
  int n_dirichlet = 0;
  for (const auto& v : rd.vertices()) n_dirichlet += v.condition.is_dirichlet();
  CHECK(n_dirichlet == 3);

  CHECK_THROWS_AS(remove_cycle_dirichlet(lasso, {"loop", "stick"}), graph_error);
}

TEST_CASE("find_cycles") {
  MetricGraph path({{"a", VertexCondition::neumann()},
                    {"b", VertexCondition::neumann()}},
                   {{"e0", 0, 1, 1.0}});
  CHECK(find_cycles(path).empty());

  MetricGraph dumbbell = make_dumbbell();
  auto cycles = find_cycles(dumbbell);
  REQUIRE(cycles.size() == 2);
  CHECK(cycles[0].size() == 1);
  CHECK(cycles[1].size() == 1);

  MetricGraph fig8({{"o", VertexCondition::neumann()}},
                   {{"l0", 0, 0, 1.0}, {"l1", 0, 0, 0.7}});
  CHECK_THROWS_WITH(find_cycles(fig8),
                    Catch::Matchers::ContainsSubstring("cycles not disjoint"));
}

TEST_CASE("remove_cycle lowers beta once per cycle") {
  MetricGraph g = make_cycle_chain3();
  int beta = cyclomatic_number(g);
  auto cycles = find_cycles(g);
  REQUIRE(static_cast<int>(cycles.size()) == beta);
  MetricGraph cur = g;
  for (const auto& cyc : cycles) {
    // ids survive surgeries, so the cycle lists stay valid
    MetricGraph next = remove_cycle_dirichlet(cur, cyc);
    CHECK(cyclomatic_number(next) == cyclomatic_number(cur) - 1);
    cur = next;
  }
  CHECK(cyclomatic_number(cur) == 0);
}

TEST_CASE("graph json round trip") {
  MetricGraph g = make_dihedral();
  MetricGraph h = graph_from_json(graph_to_json(g));
  CHECK(h.vertex_count() == g.vertex_count());
  CHECK(h.edge_count() == g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e)
    CHECK(h.edge(e).length == g.edge(e).length);
}
