// Randomized interlacing audits: a surgery (parameter increase, glue, or
// cut plus re-glue) is applied to a graph and the two spectra are checked
// against the interlacing chains
//
//   lambda_n(before) <= lambda_n(after) <= lambda_{n+1}(before)
//
// with strictness confirmed on simple vertex-nonvanishing levels.
#pragma once

#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nodalscope/graph.hpp"
#include "nodalscope/nodal.hpp"
#include "nodalscope/report.hpp"
#include "nodalscope/spectrum.hpp"

namespace nodalscope {

struct InterlacingTrial {
  std::string surgery;
  bool passed = true;
  int strict_checked = 0;
  std::string failure;
};

struct InterlacingReport {
  int trials = 0;
  int passed = 0;
  int strict_confirmed = 0;
  std::vector<InterlacingTrial> log;

  bool all_passed() const { return passed == trials; }
};

namespace detail {

inline std::vector<Eigenpair> spectrum_with_levels(const MetricGraph& g, int count) {
  double k_max = std::max(2.0, (count + 4.0) * M_PI / g.total_length());
  auto spec = eigenvalues_up_to(g, k_max);
  while (count_up_to(spec, k_max) < count) {
    k_max *= 1.4;
    spec = eigenvalues_up_to(g, k_max);
  }
  return spec;
}

inline std::vector<double> expand_levels(const std::vector<Eigenpair>& spec, int count) {
  std::vector<double> ks;
  for (const auto& p : spec)
    for (int m = 0; m < p.multiplicity && static_cast<int>(ks.size()) < count; ++m)
      ks.push_back(p.k);
  return ks;
}

}  // namespace detail

/// Check the two inequality chains between consecutive spectra (slack for
/// roundoff, strictness asserted where the theorems promise it).
inline InterlacingTrial check_interlacing_chain(const MetricGraph& before,
                                                const MetricGraph& after,
                                                const std::string& surgery, int n_levels,
                                                bool exclude_shared_for_strictness) {
  InterlacingTrial trial;
  trial.surgery = surgery;
  auto spec_before = detail::spectrum_with_levels(before, n_levels + 1);
  auto spec_after = detail::spectrum_with_levels(after, n_levels);
  auto kb = detail::expand_levels(spec_before, n_levels + 1);
  auto ka = detail::expand_levels(spec_after, n_levels);
  const double slack = 1e-8;

  // eigenfunction recovery per distinct simple level of `after`
  std::map<int, bool> nonvanishing;  // keyed by level.index
  for (const auto& level : spec_after) {
    if (level.index > n_levels || level.multiplicity != 1) continue;
    if (level.zero_mode) {
      nonvanishing[level.index] = true;
      continue;
    }
    try {
      nonvanishing[level.index] = vertex_nonvanishing(after, eigenfunction(after, level));
    } catch (const solver_error&) {
      nonvanishing[level.index] = false;
    }
  }

  for (int n = 1; n <= n_levels; ++n) {
    double lo = kb[n - 1], up = kb[n], mid = ka[n - 1];
    if (!(lo <= mid + slack && mid <= up + slack)) {
      trial.passed = false;
      std::ostringstream msg;
      msg << surgery << ": chain violated at n = " << n << " (" << fmt(lo) << " <= " << fmt(mid)
          << " <= " << fmt(up) << ")";
      trial.failure = msg.str();
      return trial;
    }
    auto nv = nonvanishing.find(n);
    bool strict = nv != nonvanishing.end() && nv->second;
    if (strict && exclude_shared_for_strictness) {
      // the join theorem also wants lambda_n(after) off the old spectrum
      for (double kold : kb)
        if (std::abs(kold - mid) < 1e-7) strict = false;
    }
    if (strict) {
      ++trial.strict_checked;
      if (!(mid - lo > 1e-9 && up - mid > 1e-9)) {
        trial.passed = false;
        trial.failure = surgery + ": strictness violated at n = " + std::to_string(n);
        return trial;
      }
    }
  }
  return trial;
}

/// Seeded random surgeries on a base graph; every trial must satisfy the
/// interlacing chains.
inline InterlacingReport verify_interlacing(const MetricGraph& g, int trials, unsigned seed,
                                            int n_levels = 30) {
  if (trials < 1) throw solver_error("verify_interlacing: trials must be >= 1");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  InterlacingReport report;

  for (int t = 0; t < trials; ++t) {
    int kind = static_cast<int>(u01(rng) * 3.0);
    InterlacingTrial trial;
    if (kind == 0) {
      // raise the delta parameter at a random non-Dirichlet vertex
      std::vector<int> candidates;
      for (int v = 0; v < g.vertex_count(); ++v)
        if (!g.vertex(v).condition.is_dirichlet()) candidates.push_back(v);
      if (candidates.empty()) {
        --t;
        continue;
      }
      int v = candidates[static_cast<size_t>(u01(rng) * candidates.size())];
      double alpha0 = g.vertex(v).condition.alpha_value();
      bool to_dirichlet = u01(rng) < 0.25;
      VertexCondition c = to_dirichlet ? VertexCondition::dirichlet()
                                       : VertexCondition::delta(alpha0 + 0.5 + 2.0 * u01(rng));
      MetricGraph after = change_vertex_parameter(g, g.vertex(v).id, c);
      trial = check_interlacing_chain(
          g, after, "raise alpha at '" + g.vertex(v).id + "'", n_levels, false);
    } else if (kind == 1 && g.vertex_count() >= 2) {
      std::vector<int> candidates;
      for (int v = 0; v < g.vertex_count(); ++v)
        if (!g.vertex(v).condition.is_dirichlet()) candidates.push_back(v);
      if (candidates.size() < 2) {
        --t;
        continue;
      }
      int i = static_cast<int>(u01(rng) * candidates.size());
      int j = static_cast<int>(u01(rng) * (candidates.size() - 1));
      if (j >= i) ++j;
      MetricGraph after =
          glue_vertices(g, g.vertex(candidates[i]).id, g.vertex(candidates[j]).id);
      trial = check_interlacing_chain(g, after,
                                      "glue '" + g.vertex(candidates[i]).id + "' and '" +
                                          g.vertex(candidates[j]).id + "'",
                                      n_levels, true);
    } else {
      // cut at a random interior point with Neumann halves, then the glue
      // that undoes it: the cut graph interlaces the original
      int e = static_cast<int>(u01(rng) * g.edge_count());
      double off = g.edge(e).length * (0.2 + 0.6 * u01(rng));
      MetricGraph cut = cut_at_point(g, {g.edge(e).id, off}, 0.0, 0.0);
      trial = check_interlacing_chain(
          cut, g, "cut '" + g.edge(e).id + "' and re-glue", n_levels, true);
    }
    report.trials += 1;
    report.passed += trial.passed ? 1 : 0;
    report.strict_confirmed += trial.strict_checked;
    report.log.push_back(trial);
  }
  return report;
}

inline nlohmann::json interlacing_report_json(const InterlacingReport& r) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : r.log)
    trials.push_back({{"surgery", t.surgery},
                      {"passed", t.passed},
                      {"strict_checked", t.strict_checked},
                      {"failure", t.failure}});
  return {{"trials", r.trials},
          {"passed", r.passed},
          {"strict_confirmed", r.strict_confirmed},
          {"all_passed", r.all_passed()},
          {"log", trials}};
}

}  // namespace nodalscope
