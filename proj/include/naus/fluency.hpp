#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "naus/binio.hpp"
#include "naus/common.hpp"
#include "naus/textkit.hpp"

namespace naus {

// Add-k smoothed n-gram language model over the tokens of its training
// corpus. Contexts are padded with a begin-of-sentence marker; the marker
// is context-only and never a predicted event, so conditional
// distributions sum to 1 over the corpus vocabulary.
class NGramLm {
 public:
  static constexpr int32_t kBos = -1;

  NGramLm() = default;

  static NGramLm train(const std::vector<std::vector<std::string>>& sentences, int order,
                       double k) {
    if (order < 1 || order > 5) raise(ErrorKind::ConfigError, "order must be in [1,5]");
    if (k < 0.0) raise(ErrorKind::ConfigError, "add-k smoothing needs k >= 0");
    if (sentences.empty()) raise(ErrorKind::EmptyCorpus, "empty corpus");
    NGramLm lm;
    lm.order_ = order;
    lm.k_ = k;
    bool any = false;
    for (const auto& sent : sentences) {
      if (sent.empty()) continue;
      any = true;
      std::vector<int32_t> ids(static_cast<size_t>(order) - 1, kBos);
      for (const auto& tok : sent) ids.push_back(lm.intern(tok));
      for (size_t i = static_cast<size_t>(order) - 1; i < ids.size(); ++i) {
        std::vector<int32_t> ctx(ids.begin() + (i - order + 1), ids.begin() + i);
        auto& row = lm.table_[ctx];
        ++row.counts[ids[i]];
        ++row.total;
      }
    }
    if (!any) raise(ErrorKind::EmptyCorpus, "corpus has no non-empty sentences");
    return lm;
  }

  static NGramLm train_from_lines(const std::vector<std::string>& lines, int order, double k) {
    std::vector<std::vector<std::string>> sents;
    sents.reserve(lines.size());
    for (const auto& line : lines) sents.push_back(tokenize(line));
    return train(sents, order, k);
  }

  int order() const { return order_; }
  double smoothing_k() const { return k_; }
  size_t vocab_size() const { return tokens_.size(); }

  // P(token | context tokens); context shorter than order-1 is BOS-padded.
  double cond_prob(const std::vector<std::string>& context, const std::string& token) const {
    std::vector<int32_t> ctx(static_cast<size_t>(order_) - 1, kBos);
    for (size_t i = 0; i < context.size() && i < ctx.size(); ++i)
      ctx[ctx.size() - 1 - i] = lookup(context[context.size() - 1 - i]);
    return cond_prob_ids(ctx, lookup(token));
  }

  double log_prob(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) raise(ErrorKind::EmptyInput, "cannot score an empty sentence");
    std::vector<int32_t> ids(static_cast<size_t>(order_) - 1, kBos);
    for (const auto& tok : tokens) {
      if (tok == kBlankToken)
        raise(ErrorKind::TokenContainsBlank, "blank token in sentence to score");
      ids.push_back(lookup(tok));
    }
    double lp = 0.0;
    for (size_t i = static_cast<size_t>(order_) - 1; i < ids.size(); ++i) {
      std::vector<int32_t> ctx(ids.begin() + (i - order_ + 1), ids.begin() + i);
      double p = cond_prob_ids(ctx, ids[i]);
      lp += p > 0.0 ? std::log(p) : kNegInf;
    }
    return lp;
  }

  // Reciprocal perplexity: exp(log_prob / m) with m = token count.
  double fluency_score(const std::vector<std::string>& tokens) const {
    double lp = log_prob(tokens);
    return std::exp(lp / static_cast<double>(tokens.size()));
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorKind::IoError, "cannot write LM file: " + path);
    out << "NAUSLM 1\n";
    binio::put_u32(out, static_cast<uint32_t>(order_));
    binio::put_f64(out, k_);
    binio::put_u64(out, tokens_.size());
    for (const auto& tok : tokens_) binio::put_str(out, tok);
    std::vector<const std::vector<int32_t>*> keys;
    keys.reserve(table_.size());
    for (const auto& [ctx, row] : table_) keys.push_back(&ctx);
    std::sort(keys.begin(), keys.end(),
              [](const auto* a, const auto* b) { return *a < *b; });
    binio::put_u64(out, keys.size());
    for (const auto* ctx : keys) {
      for (int32_t id : *ctx) binio::put_i32(out, id);
      const Row& row = table_.at(*ctx);
      std::vector<std::pair<int32_t, uint64_t>> entries(row.counts.begin(), row.counts.end());
      std::sort(entries.begin(), entries.end());
      binio::put_u64(out, entries.size());
      for (auto& [id, c] : entries) {
        binio::put_i32(out, id);
        binio::put_u64(out, c);
      }
    }
    if (!out) raise(ErrorKind::IoError, "short write to LM file: " + path);
  }

  static NGramLm load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::IoError, "cannot open LM file: " + path);
    binio::expect_magic(in, "NAUSLM 1", path);
    NGramLm lm;
    lm.order_ = static_cast<int>(binio::get_u32(in, "order"));
    if (lm.order_ < 1 || lm.order_ > 5) raise(ErrorKind::CorruptFile, "bad order in " + path);
    lm.k_ = binio::get_f64(in, "smoothing k");
    uint64_t n_tokens = binio::get_u64(in, "token count");
    for (uint64_t i = 0; i < n_tokens; ++i) {
      std::string tok = binio::get_str(in, "token");
      lm.index_.emplace(tok, static_cast<int32_t>(lm.tokens_.size()));
      lm.tokens_.push_back(std::move(tok));
    }
    uint64_t n_ctx = binio::get_u64(in, "context count");
    for (uint64_t i = 0; i < n_ctx; ++i) {
      std::vector<int32_t> ctx(static_cast<size_t>(lm.order_) - 1);
      for (auto& id : ctx) id = binio::get_i32(in, "context id");
      uint64_t n_entries = binio::get_u64(in, "entry count");
      Row row;
      for (uint64_t j = 0; j < n_entries; ++j) {
        int32_t id = binio::get_i32(in, "entry id");
        uint64_t c = binio::get_u64(in, "entry count");
        row.counts[id] = c;
        row.total += c;
      }
      lm.table_.emplace(std::move(ctx), std::move(row));
    }
    return lm;
  }

 private:
  struct Row {
    std::unordered_map<int32_t, uint64_t> counts;
    uint64_t total = 0;
  };

  struct VecHash {
    size_t operator()(const std::vector<int32_t>& v) const {
      return static_cast<size_t>(fnv1a64(v.data(), v.size() * sizeof(int32_t)));
    }
  };

  int32_t intern(const std::string& tok) {
    auto it = index_.find(tok);
    if (it != index_.end()) return it->second;
    int32_t id = static_cast<int32_t>(tokens_.size());
    tokens_.push_back(tok);
    index_.emplace(tok, id);
    return id;
  }

  // -2 marks a token outside the training vocabulary (count always zero).
  int32_t lookup(const std::string& tok) const {
    auto it = index_.find(tok);
    return it == index_.end() ? -2 : it->second;
  }

  double cond_prob_ids(const std::vector<int32_t>& ctx, int32_t token) const {
    uint64_t c = 0, total = 0;
    auto it = table_.find(ctx);
    if (it != table_.end()) {
      total = it->second.total;
      auto jt = it->second.counts.find(token);
      if (jt != it->second.counts.end()) c = jt->second;
    }
    double denom = static_cast<double>(total) + k_ * static_cast<double>(tokens_.size());
    if (denom <= 0.0) return 0.0;
    return (static_cast<double>(c) + k_) / denom;
  }

  int order_ = 0;
  double k_ = 0.0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> index_;
  std::unordered_map<std::vector<int32_t>, Row, VecHash> table_;
};

}  // namespace naus
