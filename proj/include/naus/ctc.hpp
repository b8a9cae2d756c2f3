#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "naus/common.hpp"
#include "naus/lattice.hpp"

namespace naus::ctc {

// Gamma: merge consecutive repeats unless separated by blank, drop blanks.
inline std::vector<int32_t> collapse(const std::vector<int32_t>& tokens, int32_t blank) {
  std::vector<int32_t> out;
  int32_t prev = blank;
  for (int32_t tok : tokens) {
    if (tok != blank && tok != prev) out.push_back(tok);
    prev = tok;
  }
  return out;
}

// Gamma': drop blanks only; repeats survive.
inline std::vector<int32_t> collapse_keep_repeats(const std::vector<int32_t>& tokens,
                                                  int32_t blank) {
  std::vector<int32_t> out;
  for (int32_t tok : tokens)
    if (tok != blank) out.push_back(tok);
  return out;
}

// Forward table of the CTC marginal, split by whether slot s emitted the
// blank. Log space; entries with t > s stay -inf.
struct AlphaTable {
  int32_t slots = 0;
  int32_t target_len = 0;
  std::vector<double> eps;     // alpha^eps,  (slots+1) x (target_len+1)
  std::vector<double> noneps;  // alpha^-eps

  double& a_eps(int32_t s, int32_t t) { return eps[static_cast<size_t>(s) * (target_len + 1) + t]; }
  double& a_non(int32_t s, int32_t t) { return noneps[static_cast<size_t>(s) * (target_len + 1) + t]; }
  double a_eps(int32_t s, int32_t t) const { return eps[static_cast<size_t>(s) * (target_len + 1) + t]; }
  double a_non(int32_t s, int32_t t) const { return noneps[static_cast<size_t>(s) * (target_len + 1) + t]; }
};

inline void check_target(const LogProbLattice& lat, const std::vector<int32_t>& target) {
  if (static_cast<int32_t>(target.size()) > lat.slots)
    raise(ErrorKind::TargetTooLong, "target longer than the lattice (" +
                                        std::to_string(target.size()) + " > " +
                                        std::to_string(lat.slots) + " slots)");
  for (int32_t y : target) {
    if (y == lat.blank()) raise(ErrorKind::TargetContainsBlank, "target contains the blank token");
    if (y < 0 || y >= lat.width) raise(ErrorKind::InvalidId, "target id out of lattice range");
  }
}

// alpha recursion over (slot, matched-prefix-length) with a virtual s=0
// column so the s=1 initialization falls out of the general step.
inline AlphaTable forward_alphas(const LogProbLattice& lat, const std::vector<int32_t>& target) {
  check_target(lat, target);
  int32_t S = lat.slots;
  int32_t Ty = static_cast<int32_t>(target.size());
  AlphaTable a;
  a.slots = S;
  a.target_len = Ty;
  a.eps.assign(static_cast<size_t>(S + 1) * (Ty + 1), kNegInf);
  a.noneps.assign(static_cast<size_t>(S + 1) * (Ty + 1), kNegInf);
  a.a_eps(0, 0) = 0.0;

  for (int32_t s = 1; s <= S; ++s) {
    double lp_blank = lat.at(s - 1, lat.blank());
    int32_t t_hi = std::min(s, Ty);
    for (int32_t t = 0; t <= t_hi; ++t) {
      a.a_eps(s, t) = log_add_exp(a.a_eps(s - 1, t), a.a_non(s - 1, t)) + lp_blank;
      if (t >= 1) {
        double lp_tok = lat.at(s - 1, target[t - 1]);
        double from;
        if (t >= 2 && target[t - 1] == target[t - 2]) {
          // repeated word: the previous slot must close y_{1:t-1} with a
          // blank, or we are merging into an existing y_t
          from = log_add_exp(a.a_eps(s - 1, t - 1), a.a_non(s - 1, t));
        } else {
          from = log_add_exp(log_add_exp(a.a_eps(s - 1, t - 1), a.a_non(s - 1, t - 1)),
                             a.a_non(s - 1, t));
        }
        a.a_non(s, t) = from + lp_tok;
      }
    }
  }
  return a;
}

// log P(target | lattice) marginalized over all token sequences whose
// collapse is the target. An empty target yields the all-blank mass.
inline double marginal_log_prob(const LogProbLattice& lat, const std::vector<int32_t>& target) {
  AlphaTable a = forward_alphas(lat, target);
  return log_add_exp(a.a_eps(lat.slots, a.target_len), a.a_non(lat.slots, a.target_len));
}

// Enumeration oracle: sums the probability of every token sequence that
// collapses to the target. Exponential in S; guarded.
inline double brute_force_marginal(const LogProbLattice& lat, const std::vector<int32_t>& target) {
  check_target(lat, target);
  double cells = std::pow(static_cast<double>(lat.width), static_cast<double>(lat.slots));
  if (cells > 1e6) raise(ErrorKind::InstanceTooLarge, "brute force limited to (V+1)^S <= 1e6");
  int64_t total = static_cast<int64_t>(cells);
  double acc = kNegInf;
  std::vector<int32_t> seq(static_cast<size_t>(lat.slots));
  for (int64_t code = 0; code < total; ++code) {
    int64_t c = code;
    double lp = 0.0;
    for (int32_t s = 0; s < lat.slots; ++s) {
      seq[s] = static_cast<int32_t>(c % lat.width);
      c /= lat.width;
      lp += lat.at(s, seq[s]);
    }
    if (lp == kNegInf) continue;
    if (collapse(seq, lat.blank()) == target) acc = log_add_exp(acc, lp);
  }
  return acc;
}

}  // namespace naus::ctc
