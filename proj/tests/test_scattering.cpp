#include <catch2/catch_amalgamated.hpp>

#include "nodalscope/builtins.hpp"
#include "nodalscope/scattering.hpp"

#include "helpers.hpp"

using namespace nodalscope;
using Catch::Approx;

namespace {

/// The two-vertex cycle of lengths 2b and 2c with leads on both vertices.
OpenGraph two_lead_cycle(double b, double c) {
  MetricGraph g({{"u", VertexCondition::neumann()}, {"w", VertexCondition::neumann()}},
                {{"cycB", 0, 1, 2 * b}, {"cycC", 0, 1, 2 * c}});
  return attach_leads(g, {"u", "w"});
}

}  // namespace

TEST_CASE("attach_leads bookkeeping") {
  MetricGraph g = make_interval(1.0, VertexCondition::neumann(), VertexCondition::dirichlet());
  OpenGraph og = attach_leads(g, {"v0"});
  CHECK(og.lead_count() == 1);
  CHECK(og.base.vertex(og.marked_idx[0]).condition.kind == ConditionKind::Neumann);

  OpenGraph cyc = two_lead_cycle(1 / std::sqrt(2.0), 1 / std::sqrt(3.0));
  CHECK(cyc.lead_count() == 2);

  CHECK_THROWS_AS(attach_leads(g, {"nope"}), graph_error);
  CHECK_THROWS_AS(attach_leads(g, {"v0", "v0"}), graph_error);
}

TEST_CASE("q_blocks dimensions and unitarity") {
  MetricGraph g = make_interval(0.8, VertexCondition::neumann(), VertexCondition::neumann());
  ScatteringSample s = q_blocks(attach_leads(g, {"v0"}), 1.3);
  CHECK(s.R.rows() == 1);
  CHECK(s.U_tilde.rows() == 2);
  CHECK(max_abs_deviation_q_unitary(s) < tol::unitarity_u);

  ScatteringSample cyc = q_blocks(two_lead_cycle(0.7, 0.55), 2.1);
  CHECK(cyc.R.rows() == 2);
  CHECK(cyc.T_o.rows() == 2);
  CHECK(cyc.T_o.cols() == 4);
  CHECK(cyc.T_i.rows() == 4);
  CHECK(cyc.T_i.cols() == 2);
  CHECK(cyc.U_tilde.rows() == 4);

  std::mt19937 rng(31);
  for (int t = 0; t < 12; ++t) {
    MetricGraph rg = testutil::random_graph(rng, {.beta = t % 3});
    std::string lead;
    for (const auto& v : rg.vertices())
      if (!v.condition.is_dirichlet()) { lead = v.id; break; }
    REQUIRE(!lead.empty());
    std::uniform_real_distribution<double> kd(0.3, 9.0);
    ScatteringSample qs = q_blocks(attach_leads(rg, {lead}), kd(rng));
    CHECK(max_abs_deviation_q_unitary(qs) < tol::unitarity_u);
  }
}

TEST_CASE("one-lead interval scattering is a pure phase") {
  MetricGraph g = make_interval(1.0, VertexCondition::neumann(), VertexCondition::dirichlet());
  OpenGraph og = attach_leads(g, {"v0"});
  for (double k : {0.4, 1.1, 2.7, 5.3, 8.9}) {
    ScatteringSample s = scattering_matrix(og, k);
    REQUIRE(s.S.rows() == 1);
    CHECK(std::abs(std::abs(s.S(0, 0)) - 1.0) < 1e-12);
  }
}

TEST_CASE("two-lead cycle scattering matches the symmetric parametrization") {
  OpenGraph og = two_lead_cycle(1 / std::sqrt(2.0), 1 / std::sqrt(3.0));
  for (double k : {0.6, 1.9, 3.3, 4.8, 7.1}) {
    ScatteringSample s = scattering_matrix(og, k);
    // reflection symmetry: S = [[cos g e^{ip}, sin g e^{i(p+pi/2)}],
    //                           [sin g e^{i(p+pi/2)}, cos g e^{ip}]]
    CHECK(std::abs(s.S(0, 0) - s.S(1, 1)) < 1e-10);
    CHECK(std::abs(s.S(0, 1) - s.S(1, 0)) < 1e-10);
    Complex det = s.S(0, 0) * s.S(1, 1) - s.S(0, 1) * s.S(1, 0);
    double phi = 0.5 * std::arg(det);
    Complex u = s.S(0, 0) * std::exp(Complex(0, -phi));
    Complex w = -Complex(0, 1) * s.S(0, 1) * std::exp(Complex(0, -phi));
    CHECK(std::abs(u.imag()) < 1e-9);
    CHECK(std::abs(w.imag()) < 1e-9);
    double cg = u.real(), sg = w.real();
    CHECK(cg * cg + sg * sg == Approx(1.0).margin(1e-9));
    CMatrix rec(2, 2);
    rec << cg * std::exp(Complex(0, phi)), sg * std::exp(Complex(0, phi + M_PI / 2)),
        sg * std::exp(Complex(0, phi + M_PI / 2)), cg * std::exp(Complex(0, phi));
    CHECK((rec - s.S).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("S stays unitary on the Delta set") {
  OpenGraph og = two_lead_cycle(1.0, 1.0);  // Delta = {pi p / 2}
  for (int p = 1; p <= 5; ++p) {
    double k = M_PI * p / 2;
    ScatteringSample s = scattering_matrix(og, k);
    CHECK(s.in_delta);
    CHECK(max_abs_deviation_from_unitary(s.S) < tol::unitarity_s);
  }
}

TEST_CASE("S is independent of the kernel ambiguity in C") {
  OpenGraph og = two_lead_cycle(1.0, 1.0);
  const double k = M_PI / 2;
  ScatteringSample s = scattering_matrix(og, k);
  REQUIRE(s.in_delta);
  const int ne = s.U_tilde.rows();
  CMatrix a = CMatrix::Identity(ne, ne) - s.U_tilde;
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double thresh = tol::kernel_rel * std::max(sv(0), 1.0);
  CMatrix ut_ti = svd.matrixU().adjoint() * s.T_i;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) >= thresh)
      ut_ti.row(i) /= sv(i);
    else
      ut_ti.row(i).setZero();
  }
  CMatrix c = svd.matrixV() * ut_ti;
  std::mt19937 rng(17);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 5; ++trial) {
    CMatrix cp = c;
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) >= thresh) continue;
      for (int col = 0; col < cp.cols(); ++col)
        cp.col(col) += Complex(gauss(rng), gauss(rng)) * svd.matrixV().col(i);
    }
    CMatrix s2 = s.R + s.T_o * cp;
    CHECK((s2 - s.S).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("in_delta detection") {
  OpenGraph generic = two_lead_cycle(1 / std::sqrt(2.0), 1 / std::sqrt(3.0));
  for (double k : {0.5, 1.0, 2.0, 3.0, 4.5, 6.2}) CHECK_FALSE(in_delta(generic, k));

  OpenGraph rational = two_lead_cycle(1.0, 1.0);
  CHECK(in_delta(rational, M_PI / 2));
  CHECK_FALSE(in_delta(rational, 1.1));
  auto dp = delta_points(rational, 5.0);
  REQUIRE(dp.size() == 3);
  CHECK(dp[0] == Approx(M_PI / 2).margin(1e-8));
  CHECK(dp[1] == Approx(M_PI).margin(1e-8));
  CHECK(dp[2] == Approx(3 * M_PI / 2).margin(1e-8));

  // a star with a lead at every leaf has empty Delta at generic lengths
  MetricGraph star = make_star({1.0, 0.723606797749979, 0.54030230586814},
                               {VertexCondition::neumann(), VertexCondition::neumann(),
                                VertexCondition::neumann()});
  OpenGraph all_leaves = attach_leads(star, {"t1", "t2", "t3"});
  CHECK(delta_points(all_leaves, 8.0).empty());
}

TEST_CASE("one-lead interval phase winds by 2 pi between eigenvalues") {
  MetricGraph g = make_interval(1.0, VertexCondition::neumann(), VertexCondition::dirichlet());
  OpenGraph og = attach_leads(g, {"v0"});
  // sigma(Gamma) = {(m + 1/2) pi}; track the phase through three of them
  std::optional<std::vector<double>> prev;
  double p1 = 0, p2 = 0, p3 = 0;
  for (double k = 0.05; k <= 5 * M_PI / 2 + 0.005; k += 0.005) {
    auto ph = s_eigenphases(scattering_matrix(og, k), prev);
    prev = ph;
    if (std::abs(k - M_PI / 2) < 2.6e-3) p1 = ph[0];
    if (std::abs(k - 3 * M_PI / 2) < 2.6e-3) p2 = ph[0];
    if (std::abs(k - 5 * M_PI / 2) < 2.6e-3) p3 = ph[0];
  }
  CHECK(p2 - p1 == Approx(2 * M_PI).margin(0.05));
  CHECK(p3 - p2 == Approx(2 * M_PI).margin(0.05));
}

TEST_CASE("identical k gives identical phases") {
  OpenGraph og = two_lead_cycle(0.9, 0.52);
  auto a = s_eigenphases(scattering_matrix(og, 2.2));
  auto b = s_eigenphases(scattering_matrix(og, 2.2));
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == Approx(b[i]).margin(1e-12));
}

TEST_CASE("eigenphase branches increase on Neumann/Dirichlet graphs") {
  OpenGraph og = two_lead_cycle(1 / std::sqrt(2.0), 1 / std::sqrt(3.0));
  std::optional<std::vector<double>> prev;
  int violations = 0;
  for (double k = 0.2; k < 4.2; k += 1e-3) {
    auto ph = s_eigenphases(scattering_matrix(og, k), prev);
    if (prev)
      for (size_t b = 0; b < ph.size(); ++b)
        if (ph[b] <= (*prev)[b] + 1e-8) ++violations;
    prev = ph;
  }
  CHECK(violations == 0);
}

TEST_CASE("inside-outside duality on the interval") {
  MetricGraph g = make_interval(1.0, VertexCondition::neumann(), VertexCondition::dirichlet());
  OpenGraph og = attach_leads(g, {"v0"});
  auto io = inside_outside_spectrum(og, 9.0);
  auto direct = testutil::interval_dn(1.0, 9.0);
  REQUIRE(io.size() == direct.size());
  for (size_t i = 0; i < io.size(); ++i) CHECK(io[i] == Approx(direct[i]).margin(1e-9));
}

TEST_CASE("inside-outside duality on the dihedral graph") {
  MetricGraph g = make_dihedral();
  OpenGraph og = attach_leads(g, {"u", "w"});
  auto io = inside_outside_spectrum(og, 6.0);
  std::vector<double> direct;
  for (const auto& p : eigenvalues_up_to(g, 6.0))
    if (!p.zero_mode) direct.push_back(p.k);
  REQUIRE(io.size() == direct.size());
  for (size_t i = 0; i < io.size(); ++i)
    CHECK(io[i] == Approx(direct[i]).margin(tol::spectrum_match));
}

TEST_CASE("inside-outside duality needs the Delta points when b = c") {
  OpenGraph og = two_lead_cycle(1.0, 1.0);  // the circle of length 4
  auto io = inside_outside_spectrum(og, 5.0);
  std::vector<double> direct;
  for (const auto& p : eigenvalues_up_to(make_circle(4.0), 5.0))
    if (!p.zero_mode) direct.push_back(p.k);  // as a set of k values
  REQUIRE(io.size() == direct.size());
  for (size_t i = 0; i < io.size(); ++i)
    CHECK(io[i] == Approx(direct[i]).margin(tol::spectrum_match));
  CHECK(!delta_points(og, 5.0).empty());
}
