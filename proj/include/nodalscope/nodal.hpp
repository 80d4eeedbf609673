// Nodal analysis: direct zero and domain counts of recovered
// eigenfunctions, the per-edge zero formula, the single-cycle and
// disjoint-cycles count formulas, and single-lead entrance events.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nodalscope/graph.hpp"
#include "nodalscope/report.hpp"
#include "nodalscope/scattering.hpp"
#include "nodalscope/spectrum.hpp"

namespace nodalscope {

/// Number of zeros on an edge of length L from the endpoint signs:
/// floor(kL/pi) + (1 - (-1)^floor(kL/pi) su sv) / 2.
inline int zeros_on_edge_formula(double k, double length, int sign_u, int sign_v) {
  if (sign_u * sign_v == 0) throw solver_error("zeros_on_edge_formula: endpoint signs must be nonzero");
  double q = k * length / M_PI;
  if (std::abs(q - std::round(q)) < 1e-9)
    throw solver_error("zeros_on_edge_formula: kL/pi is boundary-degenerate, use the direct count");
  long fl = static_cast<long>(std::floor(q));
  int parity = (fl % 2 == 0) ? 1 : -1;
  return static_cast<int>(fl) + (1 - parity * sign_u * sign_v) / 2;
}

/// Zero set of one eigenfunction.
struct ZeroCount {
  int mu_interior = 0;
  int mu_with_boundary = 0;  // interior plus one per Dirichlet vertex
  std::map<std::string, int> per_edge;
  std::map<std::string, std::vector<double>> positions;  // offsets from u
};

namespace detail {
/// Smallest |f(v)| over the non-Dirichlet vertices, relative to sup |f|.
inline double vertex_floor(const MetricGraph& g, const Eigenpair& pair) {
  if (pair.zero_mode) return 1.0;
  double sup = sup_norm(g, pair);
  double lo = 1.0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.vertex(v).condition.is_dirichlet()) continue;
    for (int e = 0; e < g.edge_count(); ++e) {
      if (g.edge(e).u == v)
        lo = std::min(lo, std::abs(edge_wave(g, pair, e).value(0.0)) / sup);
      else if (g.edge(e).v == v)
        lo = std::min(lo, std::abs(edge_wave(g, pair, e).value(g.edge(e).length)) / sup);
    }
  }
  return lo;
}
}  // namespace detail

inline bool vertex_nonvanishing(const MetricGraph& g, const Eigenpair& pair) {
  return detail::vertex_floor(g, pair) >= tol::realness_rel;
}

/// Interior zeros found in closed form from the per-edge cosine waves.
inline ZeroCount zeros_direct(const MetricGraph& g, const Eigenpair& pair) {
  if (pair.multiplicity != 1) throw solver_error("zeros_direct: level must be simple");
  if (!pair.has_amplitudes()) throw solver_error("zeros_direct: eigenfunction not recovered");

  ZeroCount out;
  int dirichlet_vertices = 0;
  for (const auto& v : g.vertices()) dirichlet_vertices += v.condition.is_dirichlet();

  if (pair.zero_mode) {
    for (const auto& e : g.edges()) {
      out.per_edge[e.id] = 0;
      out.positions[e.id] = {};
    }
    out.mu_with_boundary = dirichlet_vertices;
    return out;
  }
  if (!vertex_nonvanishing(g, pair))
    throw solver_error("zeros_direct: eigenfunction vanishes on a vertex at n = " +
                       std::to_string(pair.index));

  for (int e = 0; e < g.edge_count(); ++e) {
    EdgeWave w = edge_wave(g, pair, e);
    std::vector<double> zs;
    // zeros of amp cos(kx - psi) at x = (psi + pi/2 + m pi) / k; a margin
    // of 1e-8 in phase units keeps Dirichlet endpoint zeros (which sit at
    // the vertex up to roundoff) out of the interior count
    const double margin = 1e-8 / w.k;
    long m_lo = static_cast<long>(std::ceil((-w.psi - M_PI / 2) / M_PI)) - 1;
    long m_hi = static_cast<long>(std::floor((w.k * w.length - w.psi - M_PI / 2) / M_PI)) + 1;
    for (long m = m_lo; m <= m_hi; ++m) {
      double x = (w.psi + M_PI / 2 + m * M_PI) / w.k;
      if (x > margin && x < w.length - margin) zs.push_back(x);
    }
    std::sort(zs.begin(), zs.end());
    out.per_edge[g.edge(e).id] = static_cast<int>(zs.size());
    out.positions[g.edge(e).id] = zs;
    out.mu_interior += static_cast<int>(zs.size());
  }
  out.mu_with_boundary = out.mu_interior + dirichlet_vertices;
  return out;
}

/// Nodal domain count: edges split at their zeros, segments joined across
/// vertices where f does not vanish.
inline int domains_direct(const MetricGraph& g, const Eigenpair& pair) {
  if (pair.zero_mode) return 1;
  ZeroCount zc = zeros_direct(g, pair);

  // parent-pointer union over segments
  std::vector<int> parent;
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

  std::vector<int> first_segment(g.edge_count()), last_segment(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    int segs = zc.per_edge[g.edge(e).id] + 1;
    first_segment[e] = static_cast<int>(parent.size());
    for (int s = 0; s < segs; ++s) parent.push_back(static_cast<int>(parent.size()));
    last_segment[e] = static_cast<int>(parent.size()) - 1;
  }
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.vertex(v).condition.is_dirichlet()) continue;  // f(v) = 0 separates
    int anchor = -1;
    for (int e = 0; e < g.edge_count(); ++e) {
      for (int end = 0; end < 2; ++end) {
        if ((end == 0 ? g.edge(e).u : g.edge(e).v) != v) continue;
        int seg = end == 0 ? first_segment[e] : last_segment[e];
        if (anchor < 0)
          anchor = seg;
        else
          unite(anchor, seg);
      }
    }
  }
  std::vector<char> seen(parent.size(), 0);
  int count = 0;
  for (int i = 0; i < static_cast<int>(parent.size()); ++i) {
    int r = find(i);
    if (!seen[r]) {
      seen[r] = 1;
      ++count;
    }
  }
  return count;
}

/// mu_n = n - 1 + mod2(n - 1 + N_empty(lambda_n)) for a single-cycle graph.
inline int formula_single_cycle(int n, int n_empty_at_kn) {
  return n - 1 + ((n - 1 + n_empty_at_kn) % 2);
}

/// mu_n = n - 1 + sum_j mod2(n - 1 + N_{j,empty}(lambda_n)) over disjoint
/// cycles.
inline int formula_disjoint_cycles(int n, const std::vector<int>& n_empty_per_cycle) {
  int mu = n - 1;
  for (int nj : n_empty_per_cycle) mu += (n - 1 + nj) % 2;
  return mu;
}

/// k values below k_max where a zero enters the graph from a single lead:
/// the scattering phase passes pi (mod 2 pi).
inline std::vector<double> entrance_events_single_lead(const MetricGraph& g,
                                                       const std::string& lead_vertex,
                                                       double k_max) {
  OpenGraph og = attach_leads(g, {lead_vertex});
  auto dp = delta_points(og, k_max);
  if (!dp.empty()) {
    std::ostringstream msg;
    msg << "entrance events undefined: Delta nonempty below k_max (";
    for (size_t i = 0; i < dp.size(); ++i) msg << (i ? ", " : "") << fmt(dp[i]);
    msg << ")";
    throw solver_error(msg.str());
  }
  return phase_crossings(og, k_max, M_PI);
}

/// Per-eigenvalue nodal tuple with the bound checks.
struct NodalRecord {
  int n = 0;
  double k = 0.0;
  bool simple = false;
  bool vertex_nonvanishing = false;
  int beta = 0;
  // counts are valid only when simple && vertex_nonvanishing
  int mu_interior = -1;
  int mu_with_boundary = -1;
  int nu = -1;
  std::map<std::string, int> per_edge_zeros;

  bool counts_valid() const { return simple && vertex_nonvanishing; }
  bool zeros_bound_ok() const {
    return mu_interior >= n - 1 && mu_interior <= n - 1 + beta;
  }
  bool domains_bound_ok() const { return nu >= n - beta && nu <= n; }
  bool mu_nu_bound_ok() const {
    return nu >= mu_interior - beta + 1 && nu <= mu_interior + 1;
  }
};

inline NodalRecord nodal_record(const MetricGraph& g, const Eigenpair& level, int beta) {
  NodalRecord rec;
  rec.n = level.index;
  rec.k = level.k;
  rec.beta = beta;
  rec.simple = level.multiplicity == 1;
  if (!rec.simple) return rec;

  Eigenpair f = level.has_amplitudes() ? level : eigenfunction(g, level);
  rec.vertex_nonvanishing = vertex_nonvanishing(g, f);
  if (!rec.vertex_nonvanishing) return rec;

  ZeroCount zc = zeros_direct(g, f);
  rec.mu_interior = zc.mu_interior;
  rec.mu_with_boundary = zc.mu_with_boundary;
  rec.per_edge_zeros = zc.per_edge;
  rec.nu = domains_direct(g, f);
  return rec;
}

/// Full nodal report for the first n_max levels, with the formula column
/// filled from the disjoint-cycles theorem whenever it applies (no
/// Dirichlet vertices, cycles pairwise disjoint).
inline std::string nodal_report_csv(const MetricGraph& g, int n_max) {
  const int beta = cyclomatic_number(g);
  // generous k range for n_max levels, then extend on demand
  double k_max = std::max(1.0, (n_max + 2 + beta) * M_PI / g.total_length());
  auto spectrum = eigenvalues_up_to(g, k_max);
  while (count_up_to(spectrum, k_max) < n_max) {
    k_max *= 1.5;
    spectrum = eigenvalues_up_to(g, k_max);
  }

  // N_empty spectra per cycle when the formula applies
  bool formula_applies = !g.has_dirichlet_vertex();
  std::vector<std::vector<Eigenpair>> empties;
  if (formula_applies) {
    try {
      for (const auto& cyc : find_cycles(g))
        empties.push_back(eigenvalues_up_to(remove_cycle_dirichlet(g, cyc), k_max));
    } catch (const graph_error&) {
      formula_applies = false;  // cycles share vertices
    }
  }

  std::ostringstream out;
  out << "n,k,mu_interior,mu_with_boundary,nu,beta,lower_bound,upper_bound,formula_mu,match\n";
  for (const auto& level : spectrum) {
    for (int m = 0; m < level.multiplicity; ++m) {
      int n = level.index + m;
      if (n > n_max) break;
      NodalRecord rec = nodal_record(g, level, beta);
      rec.n = n;
      out << n << ',' << fmt(level.k) << ',';
      if (rec.counts_valid())
        out << rec.mu_interior << ',' << rec.mu_with_boundary << ',' << rec.nu;
      else
        out << ",,";
      out << ',' << beta << ',' << (n - 1) << ',' << (n - 1 + beta) << ',';
      if (rec.counts_valid() && formula_applies && !level.zero_mode) {
        std::vector<int> n_empty;
        for (const auto& esp : empties) n_empty.push_back(count_up_to(esp, level.k));
        int mu = formula_disjoint_cycles(n, n_empty);
        out << mu << ',' << (mu == rec.mu_interior ? "yes" : "NO");
      } else {
        out << ',' << "skip";
      }
      out << '\n';
    }
    if (level.index + level.multiplicity > n_max) break;
  }
  return out.str();
}

}  // namespace nodalscope
