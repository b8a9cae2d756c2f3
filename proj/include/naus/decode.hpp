#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "naus/common.hpp"
#include "naus/ctc.hpp"
#include "naus/lattice.hpp"

namespace naus::decode {

enum class CollapseMode { merge, no_merge };

inline std::vector<int32_t> apply_collapse(const std::vector<int32_t>& tokens, int32_t blank,
                                           CollapseMode mode) {
  return mode == CollapseMode::merge ? ctc::collapse(tokens, blank)
                                     : ctc::collapse_keep_repeats(tokens, blank);
}

struct Hypothesis {
  std::vector<int32_t> tokens;  // raw slot tokens, blanks included
  double logp = 0.0;
  int32_t last = -1;            // last emitted token, blank allowed
  int32_t collapsed_len = 0;
};

// Per-slot argmax followed by Gamma. Output length is uncontrolled.
inline std::vector<int32_t> greedy_decode(const LogProbLattice& lat) {
  std::vector<int32_t> raw(static_cast<size_t>(lat.slots));
  for (int32_t s = 0; s < lat.slots; ++s) {
    int32_t arg = 0;
    for (int32_t v = 1; v < lat.width; ++v)
      if (lat.at(s, v) > lat.at(s, arg)) arg = v;
    raw[s] = arg;
  }
  return ctc::collapse(raw, lat.blank());
}

inline std::vector<int32_t> truncate_decode(const LogProbLattice& lat, int32_t target_len) {
  if (target_len < 1) raise(ErrorKind::ConfigError, "target length must be >= 1");
  auto words = greedy_decode(lat);
  if (static_cast<int32_t>(words.size()) > target_len) words.resize(target_len);
  return words;
}

namespace detail {

struct Node {
  int32_t parent;  // index into arena, -1 for the root
  int32_t token;   // -1 for the root
  double logp;
  int32_t last;    // last token, -1 when empty
};

inline std::vector<int32_t> reconstruct(const std::vector<Node>& arena, int32_t id) {
  std::vector<int32_t> seq;
  for (int32_t cur = id; cur >= 0 && arena[cur].token >= 0; cur = arena[cur].parent)
    seq.push_back(arena[cur].token);
  std::reverse(seq.begin(), seq.end());
  return seq;
}

// Candidate extension of an arena node by one token.
struct Cand {
  int32_t parent;
  int32_t token;
  double logp;
};

// Rank: higher joint probability first, then the lexicographically
// smaller token-id sequence, so every decode is deterministic.
struct CandRank {
  const std::vector<Node>& arena;
  bool operator()(const Cand& a, const Cand& b) const {
    if (a.logp != b.logp) return a.logp > b.logp;
    auto sa = reconstruct(arena, a.parent);
    sa.push_back(a.token);
    auto sb = reconstruct(arena, b.parent);
    sb.push_back(b.token);
    return sa < sb;
  }
};

}  // namespace detail

// Length-control beam DP over cells (s consumed slots, t produced words).
// Cell candidates: blank extension, repeat extension (merge mode only, and
// only off a non-blank last token), and new-word extension with the top-B
// non-blank tokens of the slot (non-repeating in merge mode). Each cell
// keeps the best B hypotheses by joint probability.
inline Hypothesis length_control_best_hypothesis(const LogProbLattice& lat, int32_t target_len,
                                                 int32_t beam, CollapseMode mode) {
  int32_t S = lat.slots;
  int32_t T = target_len;
  int32_t B = beam;
  if (T < 1) raise(ErrorKind::ConfigError, "target length must be >= 1");
  if (B < 1) raise(ErrorKind::ConfigError, "beam must be >= 1");
  if (T > S)
    raise(ErrorKind::TargetLongerThanSlots, "cannot produce " + std::to_string(T) +
                                                " words from " + std::to_string(S) + " slots");
  int32_t blank = lat.blank();

  // top non-blank tokens per slot; one spare entry covers the excluded
  // repeat in merge mode
  int32_t keep = std::min(B + 1, lat.width - 1);
  std::vector<std::vector<int32_t>> slot_top(static_cast<size_t>(S));
  {
    std::vector<int32_t> order(static_cast<size_t>(lat.width - 1));
    for (int32_t s = 0; s < S; ++s) {
      for (int32_t v = 0; v < lat.width - 1; ++v) order[v] = v;
      std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                        [&](int32_t a, int32_t b) {
                          if (lat.at(s, a) != lat.at(s, b)) return lat.at(s, a) > lat.at(s, b);
                          return a < b;
                        });
      slot_top[s].assign(order.begin(), order.begin() + keep);
    }
  }

  std::vector<detail::Node> arena;
  arena.push_back({-1, -1, 0.0, -1});  // root: empty hypothesis
  auto cell_index = [T](int32_t s, int32_t t) { return static_cast<size_t>(s) * (T + 1) + t; };
  std::vector<std::vector<int32_t>> cells(static_cast<size_t>(S + 1) * (T + 1));
  cells[cell_index(0, 0)] = {0};

  std::vector<detail::Cand> cands;
  for (int32_t s = 1; s <= S; ++s) {
    double lp_blank = lat.at(s - 1, blank);
    int32_t t_hi = std::min(s, T);
    for (int32_t t = 0; t <= t_hi; ++t) {
      cands.clear();
      for (int32_t id : cells[cell_index(s - 1, t)]) {
        const auto& node = arena[id];
        cands.push_back({id, blank, node.logp + lp_blank});
        if (mode == CollapseMode::merge && node.last >= 0 && node.last != blank)
          cands.push_back({id, node.last, node.logp + lat.at(s - 1, node.last)});
      }
      if (t >= 1) {
        for (int32_t id : cells[cell_index(s - 1, t - 1)]) {
          const auto& node = arena[id];
          int32_t taken = 0;
          for (int32_t v : slot_top[s - 1]) {
            if (taken == B) break;
            if (mode == CollapseMode::merge && v == node.last) continue;
            cands.push_back({id, v, node.logp + lat.at(s - 1, v)});
            ++taken;
          }
        }
      }
      if (cands.empty()) continue;
      size_t cut = std::min(cands.size(), static_cast<size_t>(B));
      std::partial_sort(cands.begin(), cands.begin() + cut, cands.end(),
                        detail::CandRank{arena});
      auto& cell = cells[cell_index(s, t)];
      for (size_t i = 0; i < cut; ++i) {
        const auto& c = cands[i];
        arena.push_back({c.parent, c.token, c.logp, c.token});
        cell.push_back(static_cast<int32_t>(arena.size()) - 1);
      }
    }
  }

  const auto& final_cell = cells[cell_index(S, T)];
  if (final_cell.empty())
    raise(ErrorKind::EmptyCell, "no hypothesis reaches " + std::to_string(T) + " words in " +
                                    std::to_string(S) + " slots");
  const auto& best = arena[final_cell.front()];
  Hypothesis hyp;
  hyp.tokens = detail::reconstruct(arena, final_cell.front());
  hyp.logp = best.logp;
  hyp.last = best.last;
  hyp.collapsed_len = T;
  return hyp;
}

inline std::vector<int32_t> length_control_decode(const LogProbLattice& lat, int32_t target_len,
                                                  int32_t beam, CollapseMode mode) {
  auto hyp = length_control_best_hypothesis(lat, target_len, beam, mode);
  return apply_collapse(hyp.tokens, lat.blank(), mode);
}

// Standard CTC prefix beam search over collapsed prefixes; tracks
// blank/non-blank ending mass per prefix. No length control.
inline std::vector<int32_t> ctc_beam_search(const LogProbLattice& lat, int32_t beam) {
  if (beam < 1) raise(ErrorKind::ConfigError, "beam must be >= 1");
  int32_t blank = lat.blank();
  struct Mass {
    double ends_blank = kNegInf;
    double ends_word = kNegInf;
    double total() const { return log_add_exp(ends_blank, ends_word); }
  };
  std::map<std::vector<int32_t>, Mass> beam_set;
  beam_set[{}] = {0.0, kNegInf};

  for (int32_t s = 0; s < lat.slots; ++s) {
    std::map<std::vector<int32_t>, Mass> next;
    for (const auto& [prefix, mass] : beam_set) {
      double total = mass.total();
      {
        auto& tgt = next[prefix];
        tgt.ends_blank = log_add_exp(tgt.ends_blank, total + lat.at(s, blank));
      }
      for (int32_t v = 0; v < lat.width - 1; ++v) {
        double lp = lat.at(s, v);
        if (lp == kNegInf) continue;
        if (!prefix.empty() && prefix.back() == v) {
          // same word again: merged continuation, or a new word if the
          // prefix currently ends in a blank
          auto& same = next[prefix];
          same.ends_word = log_add_exp(same.ends_word, mass.ends_word + lp);
          auto ext = prefix;
          ext.push_back(v);
          auto& tgt = next[ext];
          tgt.ends_word = log_add_exp(tgt.ends_word, mass.ends_blank + lp);
        } else {
          auto ext = prefix;
          ext.push_back(v);
          auto& tgt = next[ext];
          tgt.ends_word = log_add_exp(tgt.ends_word, total + lp);
        }
      }
    }
    if (static_cast<int32_t>(next.size()) > beam) {
      std::vector<std::pair<const std::vector<int32_t>*, double>> ranked;
      ranked.reserve(next.size());
      for (const auto& [prefix, mass] : next) ranked.emplace_back(&prefix, mass.total());
      std::nth_element(ranked.begin(), ranked.begin() + beam, ranked.end(),
                       [](const auto& a, const auto& b) {
                         if (a.second != b.second) return a.second > b.second;
                         return *a.first < *b.first;
                       });
      std::map<std::vector<int32_t>, Mass> pruned;
      for (int32_t i = 0; i < beam; ++i) pruned.emplace(*ranked[i].first, next.at(*ranked[i].first));
      next = std::move(pruned);
    }
    beam_set = std::move(next);
  }

  const std::vector<int32_t>* best = nullptr;
  double best_lp = kNegInf;
  for (const auto& [prefix, mass] : beam_set) {
    double lp = mass.total();
    if (best == nullptr || lp > best_lp || (lp == best_lp && prefix < *best)) {
      best = &prefix;
      best_lp = lp;
    }
  }
  return best ? *best : std::vector<int32_t>{};
}

struct ExhaustiveBest {
  std::vector<int32_t> tokens;  // raw argmax sequence
  std::vector<int32_t> words;   // its collapse
  double logp = kNegInf;
};

// Enumeration oracle: the most probable raw sequence whose collapse has
// exactly target_len words (ties to the lexicographically smaller raw
// sequence). Empty optional when no sequence attains the length.
inline std::optional<ExhaustiveBest> exhaustive_best(const LogProbLattice& lat,
                                                     int32_t target_len, CollapseMode mode) {
  double cells = std::pow(static_cast<double>(lat.width), static_cast<double>(lat.slots));
  if (cells > 1e6) raise(ErrorKind::InstanceTooLarge, "enumeration limited to (V+1)^S <= 1e6");
  int64_t total = static_cast<int64_t>(cells);
  int32_t blank = lat.blank();
  std::optional<ExhaustiveBest> best;
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
    auto words = apply_collapse(seq, blank, mode);
    if (static_cast<int32_t>(words.size()) != target_len) continue;
    if (!best || lp > best->logp || (lp == best->logp && seq < best->tokens))
      best = ExhaustiveBest{seq, std::move(words), lp};
  }
  return best;
}

}  // namespace naus::decode
