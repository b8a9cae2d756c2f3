#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "naus/common.hpp"
#include "naus/textkit.hpp"

namespace naus::rouge {

struct Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline Score make_score(double overlap, double pred_total, double ref_total) {
  Score s;
  s.precision = pred_total > 0.0 ? 100.0 * overlap / pred_total : 0.0;
  s.recall = ref_total > 0.0 ? 100.0 * overlap / ref_total : 0.0;
  s.f1 = (s.precision > 0.0 && s.recall > 0.0)
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

// Clipped n-gram overlap.
inline Score rouge_n(const std::vector<std::string>& pred, const std::vector<std::string>& ref,
                     int n) {
  if (n < 1) raise(ErrorKind::ConfigError, "n must be >= 1");
  auto grams = [n](const std::vector<std::string>& toks) {
    std::map<std::vector<std::string>, int> bag;
    if (static_cast<int>(toks.size()) >= n)
      for (size_t i = 0; i + n <= toks.size(); ++i)
        ++bag[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
    return bag;
  };
  auto pb = grams(pred);
  auto rb = grams(ref);
  double overlap = 0.0, pred_total = 0.0, ref_total = 0.0;
  for (const auto& [g, c] : pb) {
    pred_total += c;
    auto it = rb.find(g);
    if (it != rb.end()) overlap += std::min(c, it->second);
  }
  for (const auto& [g, c] : rb) ref_total += c;
  return make_score(overlap, pred_total, ref_total);
}

inline size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline Score rouge_l(const std::vector<std::string>& pred, const std::vector<std::string>& ref) {
  double lcs = static_cast<double>(lcs_length(pred, ref));
  return make_score(lcs, static_cast<double>(pred.size()), static_cast<double>(ref.size()));
}

// Longest token prefix whose space-joined rendering fits the budget.
// Budget counts UTF-8 code points by default, raw bytes otherwise.
inline std::vector<std::string> truncate_to_budget(const std::vector<std::string>& tokens,
                                                   size_t budget, bool count_bytes = false) {
  auto width = [count_bytes](const std::string& s) -> size_t {
    if (count_bytes) return s.size();
    size_t n = 0;
    for (unsigned char c : s)
      if ((c & 0xC0) != 0x80) ++n;  // count non-continuation bytes
    return n;
  };
  std::vector<std::string> out;
  size_t used = 0;
  for (const auto& tok : tokens) {
    size_t cost = width(tok) + (out.empty() ? 0 : 1);
    if (used + cost > budget) break;
    used += cost;
    out.push_back(tok);
  }
  return out;
}

struct TruncatedRecall {
  double r1 = 0.0, r2 = 0.0, rl = 0.0;
};

inline TruncatedRecall truncated_recall(const std::vector<std::string>& pred,
                                        const std::vector<std::string>& ref, size_t char_budget,
                                        bool count_bytes = false) {
  if (char_budget < 1) raise(ErrorKind::ConfigError, "char budget must be >= 1");
  auto cut = truncate_to_budget(pred, char_budget, count_bytes);
  TruncatedRecall out;
  out.r1 = rouge_n(cut, ref, 1).recall;
  out.r2 = rouge_n(cut, ref, 2).recall;
  out.rl = rouge_l(cut, ref).recall;
  return out;
}

enum class Protocol { f1, truncated_recall };

struct RougeReport {
  Score r1, r2, rl;
  double delta_r = 0.0;
  size_t n_samples = 0;
  Protocol protocol = Protocol::f1;
  // Filled from the sidecar timing file when present.
  bool has_timing = false;
  double mean_seconds_per_sample = 0.0;
  bool has_speedup = false;
  double speedup = 0.0;

  double total() const {
    return protocol == Protocol::f1 ? r1.f1 + r2.f1 + rl.f1 : r1.recall + r2.recall + rl.recall;
  }
};

struct EvalOptions {
  Protocol protocol = Protocol::f1;
  size_t char_budget = 75;
  bool budget_bytes = false;
  // Total (R1+R2+RL) of a baseline report; delta_r stays 0 when absent.
  bool has_baseline_total = false;
  double baseline_total = 0.0;
  bool has_baseline_seconds = false;
  double baseline_seconds = 0.0;
};

// Per-sample score averaging over aligned prediction/reference lines.
inline RougeReport corpus_eval(const std::vector<std::string>& pred_lines,
                               const std::vector<std::string>& ref_lines,
                               const EvalOptions& opts = {},
                               const std::vector<double>* seconds_per_sample = nullptr) {
  if (pred_lines.size() != ref_lines.size())
    raise(ErrorKind::LineCountMismatch,
          "prediction/reference line counts differ: " + std::to_string(pred_lines.size()) +
              " vs " + std::to_string(ref_lines.size()));
  if (pred_lines.empty()) raise(ErrorKind::EmptyCorpus, "nothing to evaluate");

  RougeReport report;
  report.protocol = opts.protocol;
  report.n_samples = pred_lines.size();
  std::vector<Score> r1(pred_lines.size()), r2(pred_lines.size()), rl(pred_lines.size());
  // decoders may emit empty summaries; score them as zero, not as errors
  auto lenient_tokenize = [](const std::string& line) -> std::vector<std::string> {
    if (line.find_first_not_of(" \t\r") == std::string::npos) return {};
    return tokenize(line);
  };
  parallel_for(pred_lines.size(), [&](size_t i) {
    auto pred = lenient_tokenize(pred_lines[i]);
    auto ref = lenient_tokenize(ref_lines[i]);
    if (opts.protocol == Protocol::truncated_recall)
      pred = truncate_to_budget(pred, opts.char_budget, opts.budget_bytes);
    r1[i] = rouge_n(pred, ref, 1);
    r2[i] = rouge_n(pred, ref, 2);
    rl[i] = rouge_l(pred, ref);
  });
  auto mean_of = [&](const std::vector<Score>& scores) {
    Score m;
    for (const auto& s : scores) {
      m.precision += s.precision;
      m.recall += s.recall;
      m.f1 += s.f1;
    }
    double inv = 1.0 / static_cast<double>(scores.size());
    m.precision *= inv;
    m.recall *= inv;
    m.f1 *= inv;
    return m;
  };
  report.r1 = mean_of(r1);
  report.r2 = mean_of(r2);
  report.rl = mean_of(rl);
  if (opts.has_baseline_total) report.delta_r = report.total() - opts.baseline_total;

  if (seconds_per_sample && !seconds_per_sample->empty()) {
    double total = 0.0;
    for (double v : *seconds_per_sample) total += v;
    report.has_timing = true;
    report.mean_seconds_per_sample = total / static_cast<double>(seconds_per_sample->size());
    if (opts.has_baseline_seconds && report.mean_seconds_per_sample > 0.0) {
      report.has_speedup = true;
      report.speedup = opts.baseline_seconds / report.mean_seconds_per_sample;
    }
  }
  return report;
}

}  // namespace naus::rouge
