// Shared test utilities: seeded random graphs, closed-form spectra and the
// dense-scan secular oracle kept independent of the production root finder.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "nodalscope/evolution.hpp"
#include "nodalscope/graph.hpp"
#include "nodalscope/spectrum.hpp"

namespace testutil {

using namespace nodalscope;

struct RandomGraphOptions {
  int beta = 0;                  // extra edges beyond a spanning tree
  int min_vertices = 2;
  int max_vertices = 5;
  bool dirichlet_leaves = true;  // allow Dirichlet on degree-1 vertices
  bool allow_delta = false;      // sprinkle Delta(alpha > 0) conditions
};

/// Connected random graph with incommensurate-looking edge lengths.
inline MetricGraph random_graph(std::mt19937& rng, const RandomGraphOptions& opt = {}) {
  std::uniform_int_distribution<int> nv(opt.min_vertices, opt.max_vertices);
  std::uniform_real_distribution<double> len(0.5, 1.5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int n = nv(rng);

  std::vector<Edge> edges;
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> parent(0, v - 1);
    edges.push_back({"e" + std::to_string(edges.size()), parent(rng), v, len(rng)});
  }
  std::uniform_int_distribution<int> anyv(0, n - 1);
  for (int b = 0; b < opt.beta; ++b) {
    int x = anyv(rng), y = anyv(rng);  // self-loops and parallels allowed
    edges.push_back({"e" + std::to_string(edges.size()), x, y, len(rng)});
  }

  std::vector<Vertex> vertices;
  for (int v = 0; v < n; ++v)
    vertices.push_back({"v" + std::to_string(v), VertexCondition::neumann()});
  MetricGraph draft(vertices, edges);
  for (int v = 0; v < n; ++v) {
    if (opt.dirichlet_leaves && draft.degree(v) == 1 && u01(rng) < 0.4)
      vertices[v].condition = VertexCondition::dirichlet();
    else if (opt.allow_delta && u01(rng) < 0.25)
      vertices[v].condition = VertexCondition::delta(0.5 + 2.0 * u01(rng));
  }
  return MetricGraph(vertices, edges);
}

inline std::vector<double> interval_dd(double L, double k_max) {
  std::vector<double> ks;
  for (int m = 1; m * M_PI / L <= k_max; ++m) ks.push_back(m * M_PI / L);
  return ks;
}
inline std::vector<double> interval_dn(double L, double k_max) {
  std::vector<double> ks;
  for (int m = 0; (m + 0.5) * M_PI / L <= k_max; ++m) ks.push_back((m + 0.5) * M_PI / L);
  return ks;
}

/// Dense-scan oracle: bisect sign changes of the phase-normalized secular
/// determinant Re[det(I-U) e^{-i arg det U / 2}], which is real up to a
/// fixed sign for unitary U.  Independent of the production eigenphase
/// counter; misses only even-multiplicity roots.
inline std::vector<double> oracle_spectrum(const MetricGraph& g, double k_max,
                                           int points = 200000) {
  auto det_pair = [&](double k) {
    CMatrix u = evolution_map(g, k);
    Complex z = (CMatrix::Identity(u.rows(), u.cols()) - u).determinant();
    Complex d = u.determinant();
    return std::pair<Complex, double>(z, std::arg(d));
  };
  auto wrap = [](double a) {
    while (a > M_PI) a -= 2 * M_PI;
    while (a < -M_PI) a += 2 * M_PI;
    return a;
  };

  const double k0 = 1e-6;
  std::vector<double> roots;
  double theta_prev = 0.0, s_prev = 0.0, k_prev = k0;
  for (int i = 0; i <= points; ++i) {
    double k = k0 + (k_max - k0) * i / points;
    auto [z, arg_d] = det_pair(k);
    double theta = i == 0 ? arg_d : theta_prev + wrap(arg_d - theta_prev);
    double s = (z * std::exp(Complex(0, -theta / 2))).real();
    if (i > 0 && s_prev * s < 0.0) {
      // bisection with the branch frozen from the left endpoint
      double lo = k_prev, hi = k, slo = s_prev, th = theta_prev;
      for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        auto [zm, am] = det_pair(mid);
        double tm = th + wrap(am - th);
        double sm = (zm * std::exp(Complex(0, -tm / 2))).real();
        if (slo * sm <= 0.0)
          hi = mid;
        else {
          lo = mid;
          slo = sm;
          th = tm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    theta_prev = theta;
    s_prev = s;
    k_prev = k;
  }
  return roots;
}

/// ks (with multiplicity expansion, zero modes included) of a computed
/// spectrum, for plain comparisons.
inline std::vector<double> expanded(const std::vector<Eigenpair>& spec) {
  std::vector<double> ks;
  for (const auto& p : spec)
    for (int m = 0; m < p.multiplicity; ++m) ks.push_back(p.k);
  return ks;
}

/// Direct sign-weighted count: recover each eigenfunction and read the sign
/// of f_n(x1) f_n(x2) off the values themselves.
inline int direct_sign_count(const MetricGraph& g, const GraphPoint& x1, const GraphPoint& x2,
                             double k) {
  auto spec = eigenvalues_up_to(g, k + 1e-5);
  int total = 0;
  for (const auto& level : spec) {
    if (level.k > k) continue;
    if (level.zero_mode) {
      total += 1;
      continue;
    }
    Eigenpair f = eigenfunction(g, level);
    double v1 = evaluate(g, f, x1);
    double v2 = evaluate(g, f, x2);
    double floor = 1e-7 * sup_norm(g, f);
    if (std::abs(v1) < floor || std::abs(v2) < floor)
      throw std::runtime_error("oracle probe sits on a zero at n = " +
                               std::to_string(level.index));
    total += (v1 * v2 > 0) ? 1 : -1;
  }
  return total;
}

}  // namespace testutil
