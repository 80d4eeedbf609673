// Quantum evolution map U(k) = e^{ikL} J Sigma(k) on the 2|E| directed
// edge amplitudes, assembled from per-vertex scattering matrices.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "nodalscope/graph.hpp"

namespace nodalscope {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Tolerance policy shared across the toolkit.
namespace tol {
inline constexpr double unitarity_u = 1e-12;    // ||U*U - I||_max
inline constexpr double unitarity_s = 1e-10;    // ||S*S - I||_max
inline constexpr double kernel_rel = 1e-8;      // singular values below this (relative) span the kernel
inline constexpr double root_k = 1e-12;         // eigenvalue bisection width
inline constexpr double residual_c = 1e-6;      // ||(I-U~)C - T_i||
inline constexpr double realness_rel = 1e-7;    // max |Im f| / max |f| after phasing
inline constexpr double consistency = 1e-8;     // amplitude connection relation
inline constexpr double eig_ambiguity = 1e-9;   // "k too close to an eigenvalue"
inline constexpr double spectrum_match = 1e-8;  // cross-module spectrum comparison
}  // namespace tol

class solver_error : public std::runtime_error {
 public:
  explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

/// Directed coordinate (e, end): row 2e+end carries the incoming amplitude
/// toward endpoint `end` of edge e (end 0 = u, end 1 = v).
inline int coord_index(int edge, int end) { return 2 * edge + end; }

/// Vertex owning each directed coordinate.
inline std::vector<int> coord_vertices(const MetricGraph& g) {
  std::vector<int> owner(2 * g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    owner[coord_index(e, 0)] = g.edge(e).u;
    owner[coord_index(e, 1)] = g.edge(e).v;
  }
  return owner;
}

/// Unitary d x d vertex-scattering matrix: entries 2/(d + i alpha/k) minus
/// identity (Neumann alpha=0 gives 2/d - delta, Dirichlet gives -I).
inline CMatrix vertex_scattering_matrix(const VertexCondition& c, int degree, double k) {
  if (degree < 1) throw solver_error("vertex_scattering_matrix: degree must be >= 1");
  if (!(k > 0)) throw solver_error("vertex_scattering_matrix: k must be positive");
  Complex off;
  switch (c.kind) {
    case ConditionKind::Dirichlet: off = 0.0; break;
    case ConditionKind::Neumann: off = 2.0 / static_cast<double>(degree); break;
    case ConditionKind::Delta:
      off = 2.0 / Complex(static_cast<double>(degree), c.alpha / k);
      break;
  }
  CMatrix s = CMatrix::Constant(degree, degree, off);
  s.diagonal().array() -= 1.0;
  return s;
}

namespace detail {
/// Off-diagonal value of the vertex scattering block (the diagonal is this
/// minus one).  `degree` already includes any attached leads.
inline Complex sigma_off_value(const VertexCondition& c, int degree, double k) {
  switch (c.kind) {
    case ConditionKind::Dirichlet: return 0.0;
    case ConditionKind::Neumann: return 2.0 / static_cast<double>(degree);
    case ConditionKind::Delta: return 2.0 / Complex(static_cast<double>(degree), c.alpha / k);
  }
  return 0.0;
}
}  // namespace detail

/// Block vertex-scattering matrix Sigma on the directed coordinates.
/// Real symmetric whenever all conditions are Neumann or Dirichlet.
inline CMatrix sigma_matrix(const MetricGraph& g, double k) {
  if (!(k > 0)) throw solver_error("sigma_matrix: k must be positive");
  const int n = 2 * g.edge_count();
  const auto owner = coord_vertices(g);
  std::vector<Complex> off(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v)
    off[v] = detail::sigma_off_value(g.vertex(v).condition, g.degree(v), k);
  CMatrix sig = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (owner[i] == owner[j]) sig(i, j) = off[owner[i]] - (i == j ? 1.0 : 0.0);
  return sig;
}

/// U(k) = e^{ikL} J Sigma(k); unitary for every real k > 0.
inline CMatrix evolution_map(const MetricGraph& g, double k) {
  if (!(k > 0)) throw solver_error("evolution_map: k must be positive");
  const CMatrix sig = sigma_matrix(g, k);
  const int n = 2 * g.edge_count();
  CMatrix u(n, n);
  for (int e = 0; e < g.edge_count(); ++e) {
    const Complex phase = std::exp(Complex(0.0, k * g.edge(e).length));
    // row (e,end) picks Sigma's row at the opposite end (J) with the edge phase
    u.row(coord_index(e, 0)) = phase * sig.row(coord_index(e, 1));
    u.row(coord_index(e, 1)) = phase * sig.row(coord_index(e, 0));
  }
  return u;
}

/// det(I - U(k)); zero exactly on the (nonzero) spectrum of the graph.
inline Complex secular_value(const MetricGraph& g, double k) {
  const CMatrix u = evolution_map(g, k);
  return (CMatrix::Identity(u.rows(), u.cols()) - u).determinant();
}

/// Continuous total eigenphase of U(k) up to an additive constant:
/// 2k sum(L_e) - 2 sum_v atan(alpha_v / (d_v k)).  Differences of this
/// function against the sampled principal-angle sum count, exactly, how
/// many eigenphases of U crossed 1 on the unit circle.
inline double analytic_total_phase(const MetricGraph& g, double k) {
  double theta = 2.0 * g.total_length() * k;
  for (int v = 0; v < g.vertex_count(); ++v) {
    const auto& c = g.vertex(v).condition;
    if (c.kind == ConditionKind::Delta)
      theta -= 2.0 * std::atan(c.alpha / (g.degree(v) * k));
  }
  return theta;
}

/// Sum of the eigenphases of a unitary matrix, each taken in [0, 2pi).
inline double principal_phase_sum(const CMatrix& u) {
  Eigen::ComplexEigenSolver<CMatrix> es(u, /*computeEigenvectors=*/false);
  double sum = 0.0;
  for (int i = 0; i < u.rows(); ++i) {
    double a = std::arg(es.eigenvalues()(i));
    if (a < 0) a += 2.0 * M_PI;
    sum += a;
  }
  return sum;
}

inline double max_abs_deviation_from_unitary(const CMatrix& u) {
  CMatrix d = u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols());
  return d.cwiseAbs().maxCoeff();
}

}  // namespace nodalscope
