#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "naus/common.hpp"

namespace naus {

// S x (V+1) log-probability matrix, one row per decoding slot. The blank
// token occupies the final column; each row log-sum-exps to 0.
struct LogProbLattice {
  int32_t slots = 0;   // S
  int32_t width = 0;   // V+1
  std::vector<double> logp;  // row-major

  LogProbLattice() = default;
  LogProbLattice(int32_t s, int32_t w) : slots(s), width(w), logp(static_cast<size_t>(s) * w, kNegInf) {}

  int32_t blank() const { return width - 1; }

  double& at(int32_t s, int32_t v) { return logp[static_cast<size_t>(s) * width + v]; }
  double at(int32_t s, int32_t v) const { return logp[static_cast<size_t>(s) * width + v]; }

  double max_row_normalization_error() const {
    double worst = 0.0;
    for (int32_t s = 0; s < slots; ++s) {
      double lse = kNegInf;
      for (int32_t v = 0; v < width; ++v) lse = log_add_exp(lse, at(s, v));
      double err = std::abs(lse);
      if (err > worst) worst = err;
    }
    return worst;
  }
};

// Builds a lattice from probabilities (rows need not be pre-normalized
// when normalize=false is not set; zero probabilities map to -inf).
inline LogProbLattice lattice_from_probs(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) raise(ErrorKind::EmptyInput, "lattice needs at least one slot");
  LogProbLattice lat(static_cast<int32_t>(rows.size()), static_cast<int32_t>(rows[0].size()));
  for (int32_t s = 0; s < lat.slots; ++s) {
    if (static_cast<int32_t>(rows[s].size()) != lat.width)
      raise(ErrorKind::InconsistentDimension, "ragged lattice rows");
    for (int32_t v = 0; v < lat.width; ++v)
      lat.at(s, v) = rows[s][v] > 0.0 ? std::log(rows[s][v]) : kNegInf;
  }
  return lat;
}

// Random lattice with Dirichlet-ish rows; every entry strictly positive.
inline LogProbLattice random_lattice(int32_t slots, int32_t vocab, Rng& rng) {
  LogProbLattice lat(slots, vocab + 1);
  for (int32_t s = 0; s < slots; ++s) {
    double total = 0.0;
    std::vector<double> row(static_cast<size_t>(lat.width));
    for (auto& p : row) {
      p = -std::log(1.0 - rng.uniform());  // Exp(1)
      total += p;
    }
    for (int32_t v = 0; v < lat.width; ++v) lat.at(s, v) = std::log(row[v] / total);
  }
  return lat;
}

// Debug text format: header "S W" then one row of log-probs per slot.
inline void write_lattice_text(const LogProbLattice& lat, std::ostream& out) {
  out << lat.slots << ' ' << lat.width << '\n';
  for (int32_t s = 0; s < lat.slots; ++s) {
    for (int32_t v = 0; v < lat.width; ++v) {
      if (v) out << ' ';
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", lat.at(s, v));
      out << buf;
    }
    out << '\n';
  }
}

inline std::string lattice_to_text(const LogProbLattice& lat) {
  std::ostringstream os;
  write_lattice_text(lat, os);
  return os.str();
}

inline LogProbLattice read_lattice_text(std::istream& in) {
  int32_t s = 0, w = 0;
  if (!(in >> s >> w) || s < 1 || w < 2)
    raise(ErrorKind::ParseError, "bad lattice header");
  LogProbLattice lat(s, w);
  for (int32_t i = 0; i < s; ++i)
    for (int32_t v = 0; v < w; ++v) {
      std::string field;
      if (!(in >> field)) raise(ErrorKind::ParseError, "truncated lattice body");
      lat.at(i, v) = field == "-inf" ? kNegInf : std::strtod(field.c_str(), nullptr);
    }
  return lat;
}

}  // namespace naus
