#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "naus/common.hpp"
#include "naus/fluency.hpp"
#include "naus/similarity.hpp"
#include "naus/textkit.hpp"

namespace naus {

struct SearchConfig {
  int target_length = 10;   // T
  double gamma = 1.0;       // weight on the similarity term
  int steps = 500;          // proposals per restart
  int restarts = 1;
  uint64_t rng_seed = 0;

  void validate() const {
    if (target_length < 1) raise(ErrorKind::ConfigError, "target length must be >= 1");
    if (steps < 0) raise(ErrorKind::ConfigError, "steps must be >= 0");
    if (restarts < 1) raise(ErrorKind::ConfigError, "restarts must be >= 1");
    if (gamma < 0.0) raise(ErrorKind::ConfigError, "gamma must be >= 0");
  }
};

struct SearchState {
  std::vector<int32_t> input_ids;
  std::vector<bool> mask;  // popcount == T
  double score = 0.0;
  double f_lm = 0.0;
  double f_sim = 0.0;

  std::vector<int32_t> summary_ids() const {
    std::vector<int32_t> out;
    for (size_t i = 0; i < input_ids.size(); ++i)
      if (mask[i]) out.push_back(input_ids[i]);
    return out;
  }
};

inline double combine_score(double f_lm, double f_sim, double gamma) {
  return f_lm * std::pow(f_sim, gamma);
}

// f(y;x) = f_lm(y) * f_sim(y;x)^gamma over the masked summary.
inline double objective(SearchState& state, const Vocab& vocab, const NGramLm& lm,
                        const EmbeddingTable& table, double gamma) {
  auto summary = vocab.decode(state.summary_ids());
  auto input = vocab.decode(state.input_ids);
  state.f_lm = lm.fluency_score(summary);
  state.f_sim = table.similarity(summary, input);
  state.score = combine_score(state.f_lm, state.f_sim, gamma);
  return state.score;
}

// Flips one selected and one unselected position, both uniform at random.
inline SearchState propose_swap(const SearchState& state, Rng& rng) {
  size_t n = state.mask.size();
  std::vector<size_t> selected, unselected;
  for (size_t i = 0; i < n; ++i) (state.mask[i] ? selected : unselected).push_back(i);
  if (selected.empty() || unselected.empty())
    raise(ErrorKind::NoMovePossible, "swap needs both selected and unselected words");
  SearchState cand = state;
  cand.mask[selected[rng.below(selected.size())]] = false;
  cand.mask[unselected[rng.below(unselected.size())]] = true;
  return cand;
}

struct SearchResult {
  std::vector<int32_t> summary_ids;
  double score = 0.0;
  // Objective at the initial selection followed by every accepted step of
  // the best restart; strictly increasing.
  std::vector<double> trace;
};

// First-improvement hill climbing over word-selection masks. Inputs of
// length <= T are returned unchanged.
inline SearchResult hill_climb(const std::vector<int32_t>& input_ids, const SearchConfig& config,
                               const Vocab& vocab, const NGramLm& lm,
                               const EmbeddingTable& table) {
  config.validate();
  if (input_ids.empty()) raise(ErrorKind::EmptyInput, "cannot summarize an empty sentence");
  size_t n = input_ids.size();
  size_t t = static_cast<size_t>(config.target_length);

  if (n <= t) {
    SearchState full{input_ids, std::vector<bool>(n, true)};
    objective(full, vocab, lm, table, config.gamma);
    return {full.summary_ids(), full.score, {full.score}};
  }

  Rng rng(config.rng_seed);
  SearchResult best;
  bool have_best = false;
  for (int restart = 0; restart < config.restarts; ++restart) {
    SearchState state{input_ids, std::vector<bool>(n, false)};
    // partial Fisher-Yates selection of T positions
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), size_t{0});
    for (size_t i = 0; i < t; ++i) {
      size_t j = i + rng.below(n - i);
      std::swap(perm[i], perm[j]);
      state.mask[perm[i]] = true;
    }
    objective(state, vocab, lm, table, config.gamma);
    std::vector<double> trace{state.score};
    for (int step = 0; step < config.steps; ++step) {
      SearchState cand = propose_swap(state, rng);
      objective(cand, vocab, lm, table, config.gamma);
      if (cand.score > state.score) {
        state = std::move(cand);
        trace.push_back(state.score);
      }
    }
    if (!have_best || state.score > best.score) {
      best = {state.summary_ids(), state.score, std::move(trace)};
      have_best = true;
    }
  }
  return best;
}

// Summarizes every corpus line and writes `input<TAB>summary<TAB>score`
// rows. Work fans out across threads; each line gets its own seed stream
// and rows are written in input order, so output is reproducible.
inline size_t batch_search(const std::vector<std::string>& corpus_lines,
                           const SearchConfig& config, const Vocab& vocab, const NGramLm& lm,
                           const EmbeddingTable& table, const std::string& out_path) {
  if (corpus_lines.empty()) raise(ErrorKind::EmptyCorpus, "no sentences to search");
  std::vector<std::string> rows(corpus_lines.size());
  parallel_for(corpus_lines.size(), [&](size_t i) {
    auto tokens = tokenize(corpus_lines[i]);
    auto ids = vocab.encode(tokens);
    SearchConfig per = config;
    per.rng_seed = mix_seed(config.rng_seed, i);
    auto result = hill_climb(ids, per, vocab, lm, table);
    char score[40];
    std::snprintf(score, sizeof(score), "%.12g", result.score);
    rows[i] = join_tokens(tokens) + "\t" + join_tokens(vocab.decode(result.summary_ids)) + "\t" +
              score;
  });
  std::ofstream out(out_path, std::ios::binary);
  if (!out) raise(ErrorKind::IoError, "cannot write search output: " + out_path);
  for (const auto& row : rows) out << row << '\n';
  if (!out) raise(ErrorKind::IoError, "short write to " + out_path);
  return rows.size();
}

}  // namespace naus
