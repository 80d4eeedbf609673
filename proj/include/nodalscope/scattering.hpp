// Lead scattering: semi-infinite leads attached at marked vertices turn the
// compact graph into a scattering system.  The enlarged one-step map
//
//   Q(k) = [[R, T_o], [T_i, U~]]
//
// is unitary; the lead-to-lead scattering matrix is S = R + T_o C with
// (I - U~) C = T_i.  Where I - U~ is singular (the Delta set) C is taken as
// the minimal-norm solution, which leaves S unchanged.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "nodalscope/evolution.hpp"
#include "nodalscope/graph.hpp"
#include "nodalscope/spectrum.hpp"

namespace nodalscope {

/// A compact graph plus an ordered list of marked vertices carrying leads.
/// Marked vertices keep their original conditions.
struct OpenGraph {
  MetricGraph base;
  std::vector<std::string> marked;
  std::vector<int> marked_idx;

  int lead_count() const { return static_cast<int>(marked.size()); }
};

inline OpenGraph attach_leads(const MetricGraph& g, const std::vector<std::string>& marked) {
  if (marked.empty()) throw graph_error("attach_leads: at least one lead is required");
  std::vector<int> idx;
  for (const auto& id : marked) {
    int i = g.vertex_index(id);
    if (std::find(idx.begin(), idx.end(), i) != idx.end())
      throw graph_error("attach_leads: duplicate marked vertex '" + id + "'");
    idx.push_back(i);
  }
  return {g, marked, idx};
}

/// The blocks of Q(k) at one k, and the unitary S once filled in.  C is the
/// (minimal-norm) solution of (I - U~) C = T_i used to build S; it also
/// recovers the interior amplitudes a = C c_in of a scattering solution.
struct ScatteringSample {
  double k = 0.0;
  CMatrix R, T_o, T_i, U_tilde;
  CMatrix S;
  CMatrix C;
  bool in_delta = false;
  bool s_filled = false;
};

/// Assemble Q(k) = e^{ikL_o} J_o Sigma(k) with lead rows first.  Leads carry
/// zero length phase and J_o fixes them.
inline ScatteringSample q_blocks(const OpenGraph& og, double k) {
  if (!(k > 0)) throw solver_error("q_blocks: k must be positive");
  const MetricGraph& g = og.base;
  const int m = og.lead_count();
  const int ne = 2 * g.edge_count();
  const int n = m + ne;

  // vertex owning each row: leads then directed edge coordinates
  std::vector<int> owner(n);
  for (int l = 0; l < m; ++l) owner[l] = og.marked_idx[l];
  const auto edge_owner = coord_vertices(g);
  for (int c = 0; c < ne; ++c) owner[m + c] = edge_owner[c];

  std::vector<int> leads_at(g.vertex_count(), 0);
  for (int i : og.marked_idx) leads_at[i] += 1;
  std::vector<Complex> off(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v)
    off[v] = detail::sigma_off_value(g.vertex(v).condition, g.degree(v) + leads_at[v], k);

  CMatrix sig = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (owner[i] == owner[j]) sig(i, j) = off[owner[i]] - (i == j ? 1.0 : 0.0);

  CMatrix q(n, n);
  for (int l = 0; l < m; ++l) q.row(l) = sig.row(l);
  for (int e = 0; e < g.edge_count(); ++e) {
    const Complex phase = std::exp(Complex(0.0, k * g.edge(e).length));
    q.row(m + coord_index(e, 0)) = phase * sig.row(m + coord_index(e, 1));
    q.row(m + coord_index(e, 1)) = phase * sig.row(m + coord_index(e, 0));
  }

  ScatteringSample out;
  out.k = k;
  out.R = q.topLeftCorner(m, m);
  out.T_o = q.topRightCorner(m, ne);
  out.T_i = q.bottomLeftCorner(ne, m);
  out.U_tilde = q.bottomRightCorner(ne, ne);
  return out;
}

inline double max_abs_deviation_q_unitary(const ScatteringSample& s) {
  const int m = s.R.rows(), ne = s.U_tilde.rows();
  CMatrix q(m + ne, m + ne);
  q.topLeftCorner(m, m) = s.R;
  q.topRightCorner(m, ne) = s.T_o;
  q.bottomLeftCorner(ne, m) = s.T_i;
  q.bottomRightCorner(ne, ne) = s.U_tilde;
  return max_abs_deviation_from_unitary(q);
}

/// S(k) = R + T_o C.  Off the Delta set C = (I-U~)^{-1} T_i; on it the
/// minimal-norm solution of (I-U~)C = T_i is used and the containments
/// Range T_i in Range(I-U~) and Ker(I-U~) in Ker T_o are verified.
inline ScatteringSample scattering_matrix(const OpenGraph& og, double k) {
  ScatteringSample s = q_blocks(og, k);
  const int ne = s.U_tilde.rows();
  const CMatrix a = CMatrix::Identity(ne, ne) - s.U_tilde;

  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double thresh = tol::kernel_rel * std::max(sv.size() ? sv(0) : 0.0, 1.0);
  s.in_delta = sv(sv.size() - 1) < thresh;

  // minimal-norm solve through the truncated SVD (the plain inverse off
  // the Delta set)
  CMatrix ut_ti = svd.matrixU().adjoint() * s.T_i;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) >= thresh)
      ut_ti.row(i) /= sv(i);
    else
      ut_ti.row(i).setZero();
  }
  CMatrix c = svd.matrixV() * ut_ti;

  const double residual = (a * c - s.T_i).norm();
  if (residual > tol::residual_c)
    throw solver_error("(I-U~)C = T_i violated (residual " + std::to_string(residual) +
                       ") at k = " + std::to_string(k));
  if (s.in_delta) {
    // Ker(I-U~) must lie inside Ker T_o for T_o C to be well defined
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) >= thresh) continue;
      double leak = (s.T_o * svd.matrixV().col(i)).norm();
      if (leak > tol::residual_c)
        throw solver_error("kernel of I-U~ leaks through T_o (" + std::to_string(leak) +
                           ") at k = " + std::to_string(k));
    }
  }

  s.S = s.R + s.T_o * c;
  s.C = std::move(c);
  s.s_filled = true;
  if (max_abs_deviation_from_unitary(s.S) > tol::unitarity_s)
    throw solver_error("scattering matrix lost unitarity at k = " + std::to_string(k));
  return s;
}

/// Is k in the Delta set (I - U~ singular)?
inline bool in_delta(const OpenGraph& og, double k) {
  ScatteringSample s = q_blocks(og, k);
  const int ne = s.U_tilde.rows();
  Eigen::JacobiSVD<CMatrix> svd(CMatrix::Identity(ne, ne) - s.U_tilde);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) < tol::kernel_rel * std::max(sv(0), 1.0);
}

/// Spectrum of the base graph with plain Dirichlet conditions imposed at
/// the marked vertices.  It contains the Delta set, and its points are
/// where the S eigenphases can spike within a narrow resonance.
inline std::vector<double> dirichlet_marked_spectrum(const OpenGraph& og, double k_max) {
  MetricGraph star = og.base;
  for (const auto& id : og.marked)
    star = change_vertex_parameter(star, id, VertexCondition::dirichlet());
  std::vector<double> ks;
  for (const auto& p : eigenvalues_up_to(star, k_max))
    if (!p.zero_mode) ks.push_back(p.k);
  return ks;
}

/// Delta within (0, k_max]: the Dirichlet-marked candidates filtered by the
/// singularity test.
inline std::vector<double> delta_points(const OpenGraph& og, double k_max) {
  std::vector<double> out;
  for (double k : dirichlet_marked_spectrum(og, k_max))
    if (in_delta(og, k)) out.push_back(k);
  return out;
}

namespace detail {
inline double circular_delta(double from, double to) {
  double d = std::fmod(to - from, 2.0 * M_PI);
  if (d > M_PI) d -= 2.0 * M_PI;
  if (d <= -M_PI) d += 2.0 * M_PI;
  return d;
}
}  // namespace detail

/// Eigenphases of S.  Without `previous` the principal values (-pi, pi] are
/// returned sorted ascending.  With `previous` each branch continues by the
/// nearest-match assignment; a move of pi/2 or more per branch means the
/// sweep cannot be unwrapped reliably.
inline std::vector<double> s_eigenphases(const ScatteringSample& sample,
                                         const std::optional<std::vector<double>>& previous = {}) {
  if (!sample.s_filled) throw solver_error("s_eigenphases: S not filled");
  const int m = sample.S.rows();
  Eigen::ComplexEigenSolver<CMatrix> es(sample.S, false);
  std::vector<double> cur(m);
  for (int i = 0; i < m; ++i) cur[i] = std::arg(es.eigenvalues()(i));

  if (!previous) {
    std::sort(cur.begin(), cur.end());
    return cur;
  }
  if (static_cast<int>(previous->size()) != m)
    throw solver_error("s_eigenphases: previous phase list has wrong size");

  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) perm[i] = i;
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  // M is the number of leads, small by construction
  do {
    double cost = 0.0;
    for (int i = 0; i < m; ++i)
      cost += std::abs(detail::circular_delta((*previous)[i], cur[perm[i]]));
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<double> out(m);
  for (int i = 0; i < m; ++i) {
    double d = detail::circular_delta((*previous)[i], cur[best[i]]);
    if (std::abs(d) >= M_PI / 2)
      throw solver_error("refine sweep: eigenphase moved " + std::to_string(d) +
                         " in one step at k = " + std::to_string(sample.k));
    out[i] = (*previous)[i] + d;
  }
  return out;
}

/// Total counterclockwise speed of the S eigenphases, tr(C* L C); finite
/// everywhere on the real line but spiking near the Delta set.
inline double phase_speed_total(const MetricGraph& g, const ScatteringSample& s) {
  if (!s.s_filled) throw solver_error("phase_speed_total: S not filled");
  Eigen::VectorXd lengths(2 * g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    lengths(coord_index(e, 0)) = g.edge(e).length;
    lengths(coord_index(e, 1)) = g.edge(e).length;
  }
  return (s.C.adjoint() * lengths.asDiagonal() * s.C).trace().real();
}

namespace detail {

/// One point of a phase-tracked sweep.
struct TrackPoint {
  double k = 0.0;
  std::vector<double> ph;  // unwrapped branch phases
  double speed = 0.0;      // tr(C* L C)
};

inline TrackPoint track_point(const OpenGraph& og, double k,
                              const std::optional<std::vector<double>>& prev) {
  ScatteringSample s = scattering_matrix(og, k);
  TrackPoint p;
  p.k = k;
  p.ph = s_eigenphases(s, prev);
  p.speed = phase_speed_total(og.base, s);
  return p;
}

/// March from `from` to k1.  Steps split when a branch moves too fast or
/// when the observed total motion disagrees with the integrated speed;
/// `forced` points (the Dirichlet-marked spectrum) are always sampled
/// because the phase can gain a full turn invisibly inside a resonance
/// narrower than any step.
inline TrackPoint continue_track(const OpenGraph& og, const TrackPoint& from, double k1,
                                 const std::vector<double>& forced, int depth = 0) {
  auto split_at = [&](double km) {
    TrackPoint mid = continue_track(og, from, km, forced, depth + 1);
    return continue_track(og, mid, k1, forced, depth + 1);
  };
  for (double kf : forced)
    if (kf > from.k + 1e-13 && kf < k1 - 1e-13) return split_at(kf);

  auto split = [&]() {
    if (depth > 60 || k1 - from.k < 1e-12)
      throw solver_error("refine sweep: eigenphase motion unresolvable near k = " +
                         std::to_string(k1));
    return split_at(0.5 * (from.k + k1));
  };
  TrackPoint to;
  try {
    to = track_point(og, k1, from.ph);
  } catch (const solver_error&) {
    return split();
  }
  double moved = 0.0;
  for (size_t b = 0; b < to.ph.size(); ++b) moved += to.ph[b] - from.ph[b];
  double integrated = 0.5 * (from.speed + to.speed) * (k1 - from.k);
  if (std::abs(moved - integrated) > M_PI / 2) return split();
  return to;
}

}  // namespace detail

/// k values in (0, k_max] at which some unwrapped eigenphase of S passes
/// `offset` (mod 2 pi).  Offset 0 finds the zeros of det(I - S); offset pi
/// finds the single-lead entrance events.
inline std::vector<double> phase_crossings(const OpenGraph& og, double k_max, double offset) {
  if (!(k_max > 0)) throw solver_error("phase_crossings: k_max must be positive");
  const int m = og.lead_count();
  const double k_start = 1e-4;
  // branch speed is governed by the metric length, with local splitting
  // handling the resonant spikes
  const double step = M_PI / (16.0 * std::max(og.base.total_length(), 1e-6));

  const std::vector<double> forced = dirichlet_marked_spectrum(og, k_max + step);

  std::vector<double> roots;
  detail::TrackPoint cur = detail::track_point(og, k_start, std::nullopt);
  while (cur.k < k_max) {
    detail::TrackPoint next =
        detail::continue_track(og, cur, std::min(cur.k + step, k_max), forced);

    for (int b = 0; b < m; ++b) {
      double lo = cur.ph[b], hi = next.ph[b];
      double first =
          offset + 2.0 * M_PI * std::ceil((std::min(lo, hi) - offset) / (2.0 * M_PI) - 1e-12);
      for (double target = first; target <= std::max(lo, hi) + 1e-12; target += 2.0 * M_PI) {
        if ((lo - target) * (hi - target) > 0.0) continue;
        // bisect on the tracked branch
        detail::TrackPoint a = cur;
        double bk = next.k;
        double va = a.ph[b] - target;
        for (int it = 0; it < 80 && bk - a.k > tol::root_k; ++it) {
          detail::TrackPoint mid = detail::continue_track(og, a, 0.5 * (a.k + bk), forced);
          double vm = mid.ph[b] - target;
          if (va * vm <= 0.0)
            bk = mid.k;
          else {
            a = mid;
            va = vm;
          }
        }
        roots.push_back(0.5 * (a.k + bk));
      }
    }
    cur = next;
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Zeros of det(I - S(k)) on (0, k_max] unioned with the Delta points; by
/// the inside-outside duality this set reproduces the spectrum of the base
/// graph.
inline std::vector<double> inside_outside_spectrum(const OpenGraph& og, double k_max) {
  std::vector<double> roots = delta_points(og, k_max);
  std::vector<double> zeros = phase_crossings(og, k_max, 0.0);
  roots.insert(roots.end(), zeros.begin(), zeros.end());
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots)
    if (out.empty() || r - out.back() > 1e-9) out.push_back(r);
  return out;
}

/// CSV export of a k-sweep of S: entries, unwrapped phases, Delta flags.
inline std::string scattering_sweep_csv(const OpenGraph& og, double k_lo, double k_hi,
                                        double step) {
  if (!(step > 0) || !(k_hi > k_lo) || !(k_lo > 0))
    throw solver_error("scattering_sweep_csv: wants 0 < k_lo < k_hi and step > 0");
  const int m = og.lead_count();
  std::ostringstream out;
  out << "k";
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      out << ",ReS_" << og.marked[i] << '_' << og.marked[j] << ",ImS_" << og.marked[i] << '_'
          << og.marked[j];
  for (int i = 0; i < m; ++i) out << ",phase_" << (i + 1);
  out << ",in_delta\n";

  std::optional<std::vector<double>> prev;
  char buf[64];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.15g", x);
    out << buf;
  };
  for (double k = k_lo; k <= k_hi + 1e-12; k += step) {
    ScatteringSample s = scattering_matrix(og, k);
    auto phases = s_eigenphases(s, prev);
    prev = phases;
    put(k);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        out << ',';
        put(s.S(i, j).real());
        out << ',';
        put(s.S(i, j).imag());
      }
    for (double p : phases) {
      out << ',';
      put(p);
    }
    out << ',' << (s.in_delta ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace nodalscope
