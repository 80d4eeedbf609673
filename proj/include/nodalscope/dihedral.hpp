// The dihedral family: exact nodal-count formulas in the edge lengths, the
// merge/split event ladder, contra-phasal scattering solutions on the
// two-lead cycle, and the Weyl-inversion diagnostics.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nodalscope/builtins.hpp"
#include "nodalscope/graph.hpp"
#include "nodalscope/scattering.hpp"
#include "nodalscope/spectrum.hpp"

namespace nodalscope {

/// Advisory incommensurability check: x is suspicious when a continued
/// fraction convergent p/q with q <= max_den reproduces it to 1e-12.
inline bool looks_rational(double x, long max_den = 1000000) {
  double a = x;
  long p0 = 1, q0 = 0, p1 = static_cast<long>(std::floor(a)), q1 = 1;
  for (int it = 0; it < 64; ++it) {
    if (std::abs(x - static_cast<double>(p1) / q1) < 1e-12) return true;
    double frac = a - std::floor(a);
    if (frac < 1e-15) break;
    a = 1.0 / frac;
    long ai = static_cast<long>(std::floor(a));
    long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_den || q2 < 0) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
  }
  return false;
}

/// Parameters that break the dihedral theorems' hypotheses (advisory).
inline std::vector<std::string> dihedral_parameter_warnings(const DihedralParams& p) {
  std::vector<std::string> warn;
  if (looks_rational(p.b / p.c)) warn.push_back("b/c is close to a small rational");
  if (looks_rational(p.a / (p.b + p.c))) warn.push_back("a/(b+c) is close to a small rational");
  return warn;
}

/// mu_n = n + mod2(floor((b+c)/(a+b+c) n)).
inline int dihedral_mu(const DihedralParams& p, int n) {
  if (n < 1) throw solver_error("dihedral_mu: n must be >= 1");
  long fl = static_cast<long>(std::floor(p.alpha() * n));
  return n + static_cast<int>(fl % 2);
}

/// nu_n = n up to floor(a/(b+c)) + 1, then n - 1 + mod2(floor(alpha n)).
inline int dihedral_nu(const DihedralParams& p, int n) {
  if (n < 1) throw solver_error("dihedral_nu: n must be >= 1");
  long threshold = static_cast<long>(std::floor(p.a / (p.b + p.c))) + 1;
  if (n <= threshold) return n;
  long fl = static_cast<long>(std::floor(p.alpha() * n));
  return n - 1 + static_cast<int>(fl % 2);
}

/// The historical asymptotic form nu_n = n - 1/2 - (1/2)(-1)^floor(alpha n).
inline double dihedral_nu_asymptotic(const DihedralParams& p, int n) {
  long fl = static_cast<long>(std::floor(p.alpha() * n));
  double sign = (fl % 2 == 0) ? 1.0 : -1.0;
  return n - 0.5 - 0.5 * sign;
}

enum class DihedralEventKind { Split, Merge };

/// One merge/split event: a nodal point entering the cycle at k_p*.
struct DihedralEvent {
  int p = 0;
  double k = 0.0;
  DihedralEventKind kind = DihedralEventKind::Split;
  int d_p = 0;  // eigenvalues strictly between k_{p-1}* and k_p*
};

/// Events k_p* = pi p / (2b + 2c); splits at odd p, merges at even p; the
/// inter-event eigenvalue count is floor(rp) - floor(r(p-1)) + 1 with
/// r = a/(b+c).
inline std::vector<DihedralEvent> dihedral_events(const DihedralParams& p, int p_max) {
  if (p_max < 1) throw solver_error("dihedral_events: p_max must be >= 1");
  std::vector<DihedralEvent> out;
  const double r = p.a / (p.b + p.c);
  for (int i = 1; i <= p_max; ++i) {
    DihedralEvent ev;
    ev.p = i;
    ev.k = M_PI * i / (2.0 * p.b + 2.0 * p.c);
    ev.kind = (i % 2 == 1) ? DihedralEventKind::Split : DihedralEventKind::Merge;
    ev.d_p = static_cast<int>(std::floor(r * i) - std::floor(r * (i - 1))) + 1;
    out.push_back(ev);
  }
  return out;
}

/// k from inverting the Weyl term N(k) ~ (total length / pi) k.  For the
/// dihedral graph total_length = 2(a+b+c).  n = 0 sits outside the formula
/// and maps to 0.
inline double weyl_inverse_k(int n, double total_length) {
  if (!(total_length > 0)) throw solver_error("weyl_inverse_k: total_length must be positive");
  if (n <= 0) return 0.0;
  return M_PI * n / total_length;
}

/// The real contra-phasal scattering solution on the two-lead cycle at one
/// k: real on the leads, with the zeros of one lead matching the
/// derivative-zeros of the other.
struct ContraPhasal {
  double k = 0.0;
  double gamma = 0.0;
  double phi = 0.0;      // half-phase of det S, principal branch
  double amp2 = 0.0;     // (cos gamma - 1) / sin gamma
  bool f2_zero = false;  // gamma in 2 pi Z: the second lead carries zero
  Complex c1_in, c2_in;
  CVector interior;      // amplitudes a = C c_in on the cycle edges

  double f1(double x) const { return std::cos(phi / 2 + k * x); }
  double f2(double x) const {
    return f2_zero ? 0.0 : amp2 * std::cos((phi - M_PI) / 2 + k * x);
  }
  double df2(double x) const {
    return f2_zero ? 0.0 : -amp2 * k * std::sin((phi - M_PI) / 2 + k * x);
  }
};

/// The two-lead cycle of the dihedral construction (edges 2b and 2c).
inline OpenGraph dihedral_cycle_with_leads(const DihedralParams& p) {
  MetricGraph g({{"u", VertexCondition::neumann()}, {"w", VertexCondition::neumann()}},
                {{"cycB", 0, 1, 2.0 * p.b}, {"cycC", 0, 1, 2.0 * p.c}});
  return attach_leads(g, {"u", "w"});
}

inline ContraPhasal contra_phasal_leads(const DihedralParams& p, double k) {
  if (!(k > 0)) throw solver_error("contra_phasal_leads: k must be positive");
  OpenGraph og = dihedral_cycle_with_leads(p);
  ScatteringSample s = scattering_matrix(og, k);

  Complex det = s.S(0, 0) * s.S(1, 1) - s.S(0, 1) * s.S(1, 0);
  ContraPhasal cp;
  cp.k = k;
  cp.phi = 0.5 * std::arg(det);
  double cg = (s.S(0, 0) * std::exp(Complex(0, -cp.phi))).real();
  double sg = (-Complex(0, 1) * s.S(0, 1) * std::exp(Complex(0, -cp.phi))).real();
  cp.gamma = std::atan2(sg, cg);

  cp.c1_in = 0.5 * std::exp(Complex(0, -cp.phi / 2));
  if (std::abs(sg) < 1e-12 && cg > 0) {
    cp.f2_zero = true;
    cp.c2_in = 0.0;
  } else {
    cp.amp2 = (cg - 1.0) / sg;
    cp.c2_in = 0.5 * cp.amp2 * std::exp(Complex(0, -(cp.phi - M_PI) / 2));
  }

  // realness on the leads: c_out = S c_in must equal conj(c_in)
  Eigen::Vector2cd cin(cp.c1_in, cp.c2_in);
  Eigen::Vector2cd cout = s.S * cin;
  if ((cout - cin.conjugate()).norm() > tol::consistency * std::max(1.0, cin.norm()))
    throw solver_error("contra-phasal construction lost realness at k = " + std::to_string(k));

  cp.interior = s.C * cin;
  return cp;
}

/// The paper's observed spectral identity: floor(2a k_n / pi) equals
/// floor(a n / (a+b+c)) for the computed levels.  Reported, not asserted.
struct SpectralIdentityRow {
  int n = 0;
  long lhs = 0;
  long rhs = 0;
  bool equal = false;
};

inline std::vector<SpectralIdentityRow> spectral_identity_check(
    const DihedralParams& p, const std::vector<Eigenpair>& spectrum, int n_max) {
  std::vector<SpectralIdentityRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    SpectralIdentityRow row;
    row.n = n;
    row.lhs = static_cast<long>(std::floor(2.0 * p.a * level_k(spectrum, n) / M_PI));
    row.rhs = static_cast<long>(std::floor(p.a * n / (p.a + p.b + p.c)));
    row.equal = row.lhs == row.rhs;
    rows.push_back(row);
  }
  return rows;
}

/// Truncated periodic-orbit expansion of the nodal count:
/// n + 1/2 - sum_{j<K} (2 / ((2j+1) pi)) sin((2j+1) pi alpha n).
inline double periodic_orbit_mu(const DihedralParams& p, int n, long terms) {
  if (terms < 1) throw solver_error("periodic_orbit_mu: needs at least one term");
  const double x = p.alpha() * n;
  double sum = 0.0;
  for (long j = terms - 1; j >= 0; --j) {  // small terms first
    double m = 2.0 * j + 1.0;
    sum += 2.0 / (m * M_PI) * std::sin(m * M_PI * x);
  }
  return n + 0.5 - sum;
}

}  // namespace nodalscope
