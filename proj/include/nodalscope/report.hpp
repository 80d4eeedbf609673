// Deterministic CSV/JSON report formatting: floats carry 15 significant
// digits so repeated runs compare byte for byte.
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nodalscope/graph.hpp"
#include "nodalscope/spectrum.hpp"

namespace nodalscope {

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  return buf;
}

inline std::string fmt(int x) { return std::to_string(x); }

/// Spectrum export, one row per level index with multiplicity expansion.
inline std::string spectrum_to_csv(const std::vector<Eigenpair>& spectrum) {
  std::ostringstream out;
  out << "n,k,lambda,multiplicity\n";
  for (const auto& p : spectrum)
    for (int m = 0; m < p.multiplicity; ++m)
      out << (p.index + m) << ',' << fmt(p.k) << ',' << fmt(p.lambda()) << ','
          << p.multiplicity << '\n';
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw graph_error("cannot write output file '" + path + "'");
  f << content;
}

}  // namespace nodalscope
