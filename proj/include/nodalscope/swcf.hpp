// Sign-weighted counting function N_{x1,x2}(k): eigenvalues counted with
// the sign of f_n(x1) f_n(x2).  Probe points become transparent Neumann
// vertices carrying leads; along a k-sweep the functions
//
//   zeta(k) = det(I - S(k)) = r(k) e^{i phi(k)}
//   tau(k)  = S(k)_{12}     = (i/2) t(k) e^{i phi(k)}
//
// are real multiples of the half-determinant phase e^{i phi}.  Eigenvalues
// are the zeros of r; each contributes the sign of the crossing direction,
// which is read off the ratio r/t just before the crossing.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "nodalscope/graph.hpp"
#include "nodalscope/scattering.hpp"
#include "nodalscope/spectrum.hpp"

namespace nodalscope {

namespace detail {

struct SwcfSample {
  double k = 0.0;
  double phi = 0.0;    // continuous branch of (1/2) arg det S
  double r = 0.0;
  double t = 0.0;
  double speed = 0.0;  // d phi / dk = tr(C* L C) / 2
};

inline double wrap_mod_pi(double d) {
  d = std::fmod(d, M_PI);
  if (d > M_PI / 2) d -= M_PI;
  if (d <= -M_PI / 2) d += M_PI;
  return d;
}

/// Evaluate (phi, r, t) at k, continuing phi from a previous sample; the
/// determinant only fixes phi mod pi, continuity does the rest.
inline SwcfSample swcf_sample(const OpenGraph& og, double k, const SwcfSample* prev) {
  ScatteringSample s = scattering_matrix(og, k);
  if (std::abs(s.S(0, 1) - s.S(1, 0)) > 1e-9)
    throw solver_error("scattering matrix is not symmetric at k = " + std::to_string(k));
  Complex det = s.S(0, 0) * s.S(1, 1) - s.S(0, 1) * s.S(1, 0);
  Complex zeta = (CMatrix::Identity(2, 2) - s.S).determinant();
  Complex tau = s.S(0, 1);

  SwcfSample out;
  out.k = k;
  double raw = 0.5 * std::arg(det);
  out.phi = prev ? prev->phi + wrap_mod_pi(raw - prev->phi) : raw;

  Complex rphase = zeta * std::exp(Complex(0, -out.phi));
  Complex tphase = Complex(0, -2.0) * tau * std::exp(Complex(0, -out.phi));
  if (std::abs(rphase.imag()) > 1e-6 || std::abs(tphase.imag()) > 1e-6)
    throw solver_error("zeta/tau lost their common phase at k = " + std::to_string(k));
  out.r = rphase.real();
  out.t = tphase.real();
  out.speed = 0.5 * phase_speed_total(og.base, s);
  return out;
}

/// March from `from` to k_hi.  Steps split when the phase moves more than
/// pi/4, when its motion disagrees with the integrated speed, or across a
/// point of the Dirichlet-probed spectrum (`forced`), where the phase can
/// rise by a full half-turn inside an invisibly narrow resonance.
inline SwcfSample swcf_continue(const OpenGraph& og, const SwcfSample& from, double k_hi,
                                const std::vector<double>& forced, int depth = 0) {
  auto split_at = [&](double km) {
    SwcfSample mid = swcf_continue(og, from, km, forced, depth + 1);
    return swcf_continue(og, mid, k_hi, forced, depth + 1);
  };
  for (double kf : forced)
    if (kf > from.k + 1e-13 && kf < k_hi - 1e-13) return split_at(kf);

  SwcfSample next = swcf_sample(og, k_hi, &from);
  double integrated = 0.5 * (from.speed + next.speed) * (k_hi - from.k);
  if (std::abs(next.phi - from.phi) < M_PI / 4 &&
      std::abs((next.phi - from.phi) - integrated) < M_PI / 4)
    return next;
  if (depth > 60 || k_hi - from.k < 1e-12)
    throw solver_error("refine sweep: phase motion unresolvable near k = " + std::to_string(k_hi));
  return split_at(0.5 * (from.k + k_hi));
}

}  // namespace detail

/// One probe point materialized as a vertex: an existing endpoint when the
/// offset hits it, otherwise an inserted transparent Neumann vertex.
inline std::pair<MetricGraph, std::string> materialize_probe(const MetricGraph& g,
                                                             const GraphPoint& p) {
  int e = g.edge_index(p.edge);
  const double len = g.edge(e).length;
  if (p.offset < 0.0 || p.offset > len)
    throw graph_error("probe offset outside edge '" + p.edge + "'");
  if (p.offset == 0.0) return {g, g.vertex(g.edge(e).u).id};
  if (p.offset == len) return {g, g.vertex(g.edge(e).v).id};
  return insert_degree2_vertex(g, p, VertexCondition::neumann());
}

/// Materialize both probes, remapping the second point when the first
/// insertion split the edge it sits on.
inline std::tuple<MetricGraph, std::string, std::string> materialize_probes(
    const MetricGraph& g, const GraphPoint& x1, const GraphPoint& x2) {
  auto [g1, p1] = materialize_probe(g, x1);
  GraphPoint x2r = x2;
  if (!g1.has_edge(x2.edge)) {
    // the first probe split x2's edge into "#a" (u side) and "#b" (v side)
    if (x2.offset < x1.offset)
      x2r = {x2.edge + "#a", x2.offset};
    else
      x2r = {x2.edge + "#b", x2.offset - x1.offset};
  }
  auto [g2, p2] = materialize_probe(g1, x2r);
  return {g2, p1, p2};
}

/// Full record of one sign-weighted sweep.
struct SwcfResult {
  int count = 0;                  // N_{x1,x2}(k)
  int zero_modes = 0;
  std::vector<double> eigen_k;    // zeros of r in (0, k]
  std::vector<int> eigen_sign;    // crossing sign per eigenvalue
  std::vector<double> tau_zeros;  // zeros of t in (0, k]
};

inline SwcfResult swcf_sweep(const MetricGraph& g, const GraphPoint& x1, const GraphPoint& x2,
                             double k) {
  if (!(k > 0)) throw solver_error("sign_weighted_count: k must be positive");
  for (const auto& v : g.vertices())
    if (v.condition.kind == ConditionKind::Delta)
      throw solver_error("sign_weighted_count needs Neumann/Dirichlet conditions only");

  auto [g2, p1, p2] = materialize_probes(g, x1, x2);
  if (p1 == p2) throw solver_error("probe points coincide");
  OpenGraph og = attach_leads(g2, {p1, p2});

  // eigenvalue within a whisker of k makes the count ill-defined
  for (const auto& lev : eigenvalues_up_to(g2, k + std::max(1e-5, 1e-7 * k)))
    if (std::abs(lev.k - k) < tol::eig_ambiguity)
      throw solver_error("ambiguous count: k within 1e-9 of an eigenvalue");

  // empty Delta below k means no eigenfunction vanishes at both probes;
  // single-probe vanishing is caught by coincident r/t zeros below
  const double step = M_PI / (16.0 * g2.total_length());
  const std::vector<double> gamma_star = dirichlet_marked_spectrum(og, k + step);
  for (double ks : gamma_star)
    if (ks <= k && in_delta(og, ks))
      throw solver_error("eigenfunction vanishes at a probe point (Delta at k = " +
                         std::to_string(ks) + ")");

  SwcfResult res;
  res.zero_modes = detail::zero_mode_count(g2);

  detail::SwcfSample cur = detail::swcf_sample(og, std::min(1e-4, 0.5 * step), nullptr);

  auto bisect_zero = [&](detail::SwcfSample lo, detail::SwcfSample hi, bool on_r) {
    double flo = on_r ? lo.r : lo.t;
    for (int it = 0; it < 90 && hi.k - lo.k > tol::root_k; ++it) {
      detail::SwcfSample mid = detail::swcf_continue(og, lo, 0.5 * (lo.k + hi.k), gamma_star);
      double fm = on_r ? mid.r : mid.t;
      if (flo * fm <= 0.0)
        hi = mid;
      else {
        lo = mid;
        flo = fm;
      }
    }
    return 0.5 * (lo.k + hi.k);
  };

  while (cur.k < k) {
    detail::SwcfSample next = detail::swcf_continue(og, cur, std::min(cur.k + step, k), gamma_star);
    if (cur.r * next.r < 0.0) {
      double kn = bisect_zero(cur, next, true);
      if (kn <= k) {
        // crossing direction from r/t just before the zero
        double delta = 1e-7;
        detail::SwcfSample before =
            kn - delta > cur.k ? detail::swcf_continue(og, cur, kn - delta, gamma_star) : cur;
        int sign = (before.r * before.t < 0.0) ? +1 : -1;
        res.eigen_k.push_back(kn);
        res.eigen_sign.push_back(sign);
      }
    }
    if (cur.t * next.t < 0.0) {
      double kt = bisect_zero(cur, next, false);
      if (kt <= k) res.tau_zeros.push_back(kt);
    }
    cur = next;
  }

  for (double kn : res.eigen_k)
    for (double kt : res.tau_zeros)
      if (std::abs(kn - kt) < 1e-6)
        throw solver_error("refine sweep: zeros of zeta and tau collide near k = " +
                           std::to_string(kn) + " (eigenfunction nearly vanishes at a probe)");

  res.count = res.zero_modes;  // constant modes carry a positive product
  for (int s : res.eigen_sign) res.count += s;
  return res;
}

/// N_{x1,x2}(k), the count of eigenvalues up to k weighted by the relative
/// eigenfunction sign at the two probes.
inline int sign_weighted_count(const MetricGraph& g, const GraphPoint& x1, const GraphPoint& x2,
                               double k) {
  return swcf_sweep(g, x1, x2, k).count;
}

/// Number of eigenvalues below k whose eigenfunctions carry opposite signs
/// at the probes: (N - N_{x1,x2}) / 2.
inline int differing_sign_count(const MetricGraph& g, const GraphPoint& x1, const GraphPoint& x2,
                                double k) {
  SwcfResult res = swcf_sweep(g, x1, x2, k);
  int n = counting_function(g, k);
  int diff = n - res.count;
  if (diff < 0 || diff % 2 != 0)
    throw solver_error("differing_sign_count: N = " + std::to_string(n) +
                       " and N_swcf = " + std::to_string(res.count) + " are inconsistent");
  return diff / 2;
}

}  // namespace nodalscope
