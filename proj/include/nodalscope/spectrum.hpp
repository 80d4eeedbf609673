// Spectrum of a compact metric graph via the secular condition
// det(I - U(k)) = 0, with eigenfunction recovery from Ker(I - U).
//
// Root finding works on the eigenphases of the unitary U(k): the sampled
// sum of principal phases differs from the analytic continuous total phase
// by exactly 2 pi per eigenphase that crossed 1, so the number of spectral
// points in any interval is an exact integer.  Brackets are then narrowed
// by bisection on the same counter.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nodalscope/evolution.hpp"
#include "nodalscope/graph.hpp"
#include "nodalscope/parallel.hpp"

namespace nodalscope {

/// One spectral level: k (so lambda = k^2), its multiplicity, the 1-based
/// index of the level (first index when degenerate) and, once recovered,
/// the kernel amplitudes with the phase that makes the eigenfunction real.
struct Eigenpair {
  int index = 0;
  double k = 0.0;
  int multiplicity = 1;
  bool zero_mode = false;
  CVector amplitudes;            // incoming coefficients a, length 2|E|
  CVector outgoing;              // Sigma(k) a, cached with amplitudes
  Complex phase{1.0, 0.0};

  double lambda() const { return k * k; }
  bool has_amplitudes() const { return zero_mode || amplitudes.size() > 0; }
};

namespace detail {

struct PhaseSample {
  double k = 0.0;
  double wsum = 0.0;   // sum of principal eigenphases of U(k)
  double theta = 0.0;  // analytic_total_phase(k)
};

inline PhaseSample phase_sample(const MetricGraph& g, double k) {
  return {k, principal_phase_sum(evolution_map(g, k)), analytic_total_phase(g, k)};
}

/// Exact number of eigenphase crossings of 1 between two sampled points.
inline int crossings(const PhaseSample& a, const PhaseSample& b) {
  double raw = ((b.theta - a.theta) - (b.wsum - a.wsum)) / (2.0 * M_PI);
  long n = std::lround(raw);
  if (std::abs(raw - static_cast<double>(n)) > 0.2)
    throw solver_error("phase bookkeeping lost an integer at k in [" +
                       std::to_string(a.k) + ", " + std::to_string(b.k) + "]");
  return static_cast<int>(n);
}

struct BracketRoot {
  double k;
  int count;  // crossings inside the final bracket
};

inline void refine_bracket(const MetricGraph& g, const PhaseSample& lo,
                           const PhaseSample& hi, int count,
                           std::vector<BracketRoot>& out) {
  if (count <= 0) return;
  if (hi.k - lo.k < tol::root_k) {
    out.push_back({0.5 * (lo.k + hi.k), count});
    return;
  }
  PhaseSample mid = phase_sample(g, 0.5 * (lo.k + hi.k));
  int left = crossings(lo, mid);
  refine_bracket(g, lo, mid, left, out);
  refine_bracket(g, mid, hi, count - left, out);
}

inline int svd_kernel_dimension(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& sv = svd.singularValues();
  // singular values of I - U are at most 2; the floor keeps the threshold
  // meaningful when the whole matrix degenerates (circle at k = 2 pi m)
  double top = std::max(sv.size() ? sv(0) : 0.0, 1.0);
  int dim = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) < tol::kernel_rel * top) ++dim;
  return dim;
}

/// Zero modes: one constant eigenfunction per connected component whose
/// vertices are all Neumann.  (The secular equation is stated for k != 0,
/// so lambda = 0 is adjoined by inspection.)
inline int zero_mode_count(const MetricGraph& g) {
  auto labels = g.component_labels();
  int comps = g.component_count();
  std::vector<char> all_neumann(comps, 1);
  for (int v = 0; v < g.vertex_count(); ++v)
    if (!(g.vertex(v).condition.kind == ConditionKind::Neumann))
      all_neumann[labels[v]] = 0;
  int n = 0;
  for (char f : all_neumann) n += f;
  return n;
}

}  // namespace detail

/// All eigenvalues k in (0, k_max], each with its multiplicity, preceded by
/// the lambda = 0 levels when present.  Indices are 1-based, ascending,
/// with multiplicity expansion.
inline std::vector<Eigenpair> eigenvalues_up_to(const MetricGraph& g, double k_max) {
  if (!(k_max > 0)) throw solver_error("eigenvalues_up_to: k_max must be positive");

  bool has_delta = false;
  for (const auto& v : g.vertices())
    if (v.condition.kind == ConditionKind::Delta) has_delta = true;

  // eigenphase speed is bounded by edge lengths; this step keeps the motion
  // per sample under pi/8 (halved when Sigma itself depends on k)
  double step = M_PI / (8.0 * g.total_length());
  if (has_delta) step *= 0.5;

  const double k_start = std::min(1e-6, 0.01 * step);
  const int n_intervals = std::max(1, static_cast<int>(std::ceil((k_max - k_start) / step)));

  std::vector<detail::PhaseSample> samples(n_intervals + 1);
  parallel_for(n_intervals + 1, [&](int i) {
    double k = k_start + (k_max - k_start) * (static_cast<double>(i) / n_intervals);
    samples[i] = detail::phase_sample(g, k);
  });

  std::vector<std::pair<int, int>> brackets;  // (interval, crossing count)
  for (int i = 0; i < n_intervals; ++i) {
    int c = detail::crossings(samples[i], samples[i + 1]);
    if (c < 0)
      throw solver_error("eigenphase moved backwards near k = " + std::to_string(samples[i].k) +
                         " (non delta-type monotonicity violation)");
    if (c > 0) brackets.push_back({i, c});
  }

  std::vector<std::vector<detail::BracketRoot>> found(brackets.size());
  parallel_for(static_cast<int>(brackets.size()), [&](int b) {
    auto [i, c] = brackets[b];
    detail::refine_bracket(g, samples[i], samples[i + 1], c, found[b]);
  });

  std::vector<detail::BracketRoot> roots;
  for (auto& part : found) roots.insert(roots.end(), part.begin(), part.end());
  std::sort(roots.begin(), roots.end(), [](auto& a, auto& b) { return a.k < b.k; });

  // merge bracket roots into distinct levels and take multiplicities
  std::vector<Eigenpair> levels;
  int zero_modes = detail::zero_mode_count(g);
  for (int m = 0; m < zero_modes; ++m) {
    Eigenpair zp;
    zp.k = 0.0;
    zp.zero_mode = true;
    zp.multiplicity = 1;
    levels.push_back(zp);
  }
  size_t i = 0;
  while (i < roots.size()) {
    double k = roots[i].k;
    int count = roots[i].count;
    size_t j = i + 1;
    while (j < roots.size() && roots[j].k - roots[i].k < 1e-9) {
      count += roots[j].count;
      k = roots[j].k;
      ++j;
    }
    Eigenpair p;
    p.k = 0.5 * (roots[i].k + k);
    const CMatrix u = evolution_map(g, p.k);
    int kdim = detail::svd_kernel_dimension(CMatrix::Identity(u.rows(), u.cols()) - u);
    p.multiplicity = std::max(1, std::min(kdim, count));
    levels.push_back(p);
    i = j;
  }

  int index = 1;
  for (auto& p : levels) {
    p.index = index;
    index += p.multiplicity;
  }
  const int total = index - 1;

  // Weyl density sanity check against missed roots
  double weyl = g.total_length() * k_max / M_PI;
  double slack = 2.0 * (g.vertex_count() + g.edge_count());
  if (std::abs(total - weyl) > slack)
    throw solver_error("spectral count " + std::to_string(total) +
                       " is inconsistent with the Weyl density " + std::to_string(weyl) +
                       " (missed or spurious roots)");
  return levels;
}

/// Number of levels (with multiplicity) at k_n <= k in a computed spectrum.
inline int count_up_to(const std::vector<Eigenpair>& spectrum, double k) {
  int n = 0;
  for (const auto& p : spectrum)
    if (p.k <= k) n += p.multiplicity;
  return n;
}

/// k of the level with 1-based index n (multiplicity expanded).
inline double level_k(const std::vector<Eigenpair>& spectrum, int n) {
  for (const auto& p : spectrum)
    if (n >= p.index && n < p.index + p.multiplicity) return p.k;
  throw solver_error("level index " + std::to_string(n) + " beyond computed spectrum");
}

/// N(k) computed from scratch; k may not sit within tol of an eigenvalue.
inline int counting_function(const MetricGraph& g, double k) {
  if (!(k > 0)) throw solver_error("counting_function: k must be positive");
  auto spectrum = eigenvalues_up_to(g, k + std::max(1e-5, 1e-7 * k));
  for (const auto& p : spectrum)
    if (std::abs(p.k - k) < tol::eig_ambiguity)
      throw solver_error("ambiguous count: k within 1e-9 of eigenvalue index " +
                         std::to_string(p.index));
  return count_up_to(spectrum, k);
}

// ---------------------------------------------------------------------------
// Eigenfunctions

/// Fill the kernel amplitudes of a simple level and choose the unit phase
/// that makes the induced function real.
inline Eigenpair eigenfunction(const MetricGraph& g, Eigenpair pair) {
  if (pair.multiplicity != 1)
    throw solver_error("degenerate eigenvalue (multiplicity " +
                       std::to_string(pair.multiplicity) + "); eigenfunction needs a simple level");
  if (pair.zero_mode) {
    pair.phase = Complex(1.0, 0.0);
    return pair;  // the constant function
  }

  const CMatrix u = evolution_map(g, pair.k);
  const CMatrix m = CMatrix::Identity(u.rows(), u.cols()) - u;
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double top = std::max(sv(0), 1.0);
  int kdim = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) < tol::kernel_rel * top) ++kdim;
  if (kdim != 1)
    throw solver_error("kernel dimension " + std::to_string(kdim) +
                       " does not match multiplicity 1 at k = " + std::to_string(pair.k));

  CVector a = svd.matrixV().col(m.cols() - 1);
  if ((m * a).norm() > tol::kernel_rel * a.norm())
    throw solver_error("kernel residual above tolerance at k = " + std::to_string(pair.k));

  pair.amplitudes = a;
  pair.outgoing = sigma_matrix(g, pair.k) * a;

  // rotate so that sampled values are real: minimize sum |Im(e^{i t} f)|^2
  double sii = 0.0, sir = 0.0, srr = 0.0;
  const int per_edge = 64;
  std::vector<Complex> samples;
  for (int e = 0; e < g.edge_count(); ++e) {
    const double len = g.edge(e).length;
    const Complex ain = a(coord_index(e, 0));
    const Complex aout = pair.outgoing(coord_index(e, 0));
    for (int s = 0; s <= per_edge; ++s) {
      double x = len * s / per_edge;
      Complex f = ain * std::exp(Complex(0, -pair.k * x)) + aout * std::exp(Complex(0, pair.k * x));
      samples.push_back(f);
      sii += f.imag() * f.imag();
      sir += f.imag() * f.real();
      srr += f.real() * f.real();
    }
  }
  // smallest eigenvector of [[sii, sir], [sir, srr]]; of the two analytic
  // eigenvector forms keep the numerically larger one
  double half_trace = 0.5 * (sii + srr);
  double det = sii * srr - sir * sir;
  double lam = half_trace - std::sqrt(std::max(0.0, half_trace * half_trace - det));
  double vc = sir, vs = lam - sii;
  if (std::hypot(lam - srr, sir) > std::hypot(vc, vs)) {
    vc = lam - srr;
    vs = sir;
  }
  double norm = std::hypot(vc, vs);
  if (norm < 1e-300) {
    vc = 1.0;
    vs = 0.0;
    norm = 1.0;
  }
  pair.phase = Complex(vc / norm, vs / norm);

  double max_im = 0.0, max_abs = 0.0;
  for (const Complex& f : samples) {
    Complex r = pair.phase * f;
    max_im = std::max(max_im, std::abs(r.imag()));
    max_abs = std::max(max_abs, std::abs(r));
  }
  if (max_im > tol::realness_rel * max_abs)
    throw solver_error("no real phase found at k = " + std::to_string(pair.k) +
                       " (residual Im " + std::to_string(max_im / max_abs) + ")");
  return pair;
}

/// Real trigonometric form of an eigenfunction on one edge, coordinate
/// measured from the edge's u endpoint: f(x) = amp * cos(k x - psi).
struct EdgeWave {
  double amp = 0.0;
  double psi = 0.0;
  double k = 0.0;
  double length = 0.0;

  double value(double x) const { return amp * std::cos(k * x - psi); }
  double derivative(double x) const { return -amp * k * std::sin(k * x - psi); }
};

inline EdgeWave edge_wave(const MetricGraph& g, const Eigenpair& pair, int edge) {
  if (!pair.has_amplitudes()) throw solver_error("edge_wave: amplitudes not recovered");
  const double len = g.edge(edge).length;
  if (pair.zero_mode) return {1.0, 0.0, 0.0, len};
  Complex a = pair.phase * pair.amplitudes(coord_index(edge, 0));
  Complex b = pair.phase * pair.outgoing(coord_index(edge, 0));
  double p = a.real() + b.real();
  double q = a.imag() - b.imag();
  EdgeWave w;
  w.amp = std::hypot(p, q);
  w.psi = std::atan2(q, p);
  w.k = pair.k;
  w.length = len;
  return w;
}

/// Real value of the eigenfunction at a point of the graph.
inline double evaluate(const MetricGraph& g, const Eigenpair& pair, const GraphPoint& p) {
  int e = g.edge_index(p.edge);
  if (p.offset < 0.0 || p.offset > g.edge(e).length)
    throw solver_error("evaluate: offset outside edge '" + p.edge + "'");
  if (pair.zero_mode) return 1.0;
  return edge_wave(g, pair, e).value(p.offset);
}

/// Largest |f| over the graph (exact per-edge amplitude maximum).
inline double sup_norm(const MetricGraph& g, const Eigenpair& pair) {
  if (pair.zero_mode) return 1.0;
  double m = 0.0;
  for (int e = 0; e < g.edge_count(); ++e) {
    EdgeWave w = edge_wave(g, pair, e);
    double best = std::max(std::abs(w.value(0.0)), std::abs(w.value(w.length)));
    // interior extrema sit at k x - psi = m pi
    long m_lo = static_cast<long>(std::ceil(-w.psi / M_PI));
    long m_hi = static_cast<long>(std::floor((w.k * w.length - w.psi) / M_PI));
    for (long mm = m_lo; mm <= m_hi; ++mm)
      best = std::max(best, std::abs(w.value((w.psi + mm * M_PI) / w.k)));
    m = std::max(m, best);
  }
  return m;
}

}  // namespace nodalscope
