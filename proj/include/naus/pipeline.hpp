#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "naus/common.hpp"
#include "naus/decode.hpp"
#include "naus/fluency.hpp"
#include "naus/model.hpp"
#include "naus/rouge.hpp"
#include "naus/search.hpp"
#include "naus/similarity.hpp"
#include "naus/textkit.hpp"
#include "naus/trainer.hpp"

namespace naus {

inline std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::IoError, "cannot hash missing file: " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
    if (in.eof()) break;
  }
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

enum class DecoderKind { greedy, truncate, length_control, ctc_beam };

inline const char* decoder_name(DecoderKind d) {
  switch (d) {
    case DecoderKind::greedy: return "greedy";
    case DecoderKind::truncate: return "truncate";
    case DecoderKind::length_control: return "length-control";
    default: return "ctc-beam";
  }
}

inline DecoderKind decoder_from_name(const std::string& s) {
  if (s == "greedy") return DecoderKind::greedy;
  if (s == "truncate") return DecoderKind::truncate;
  if (s == "length-control") return DecoderKind::length_control;
  if (s == "ctc-beam") return DecoderKind::ctc_beam;
  raise(ErrorKind::ConfigError, "unknown decoder: " + s);
}

struct SummarizeOptions {
  DecoderKind decoder = DecoderKind::length_control;
  int32_t target_length = 10;
  int32_t beam = 6;
  decode::CollapseMode mode = decode::CollapseMode::merge;
  bool timing = false;
};

struct SummarizeStats {
  size_t lines = 0;
  size_t truncated_inputs = 0;
  std::vector<double> micros;  // per sample, when timing was requested
};

// Runs model inference per corpus line and writes one summary per line.
// Inputs longer than max_len are clipped; the effective target length is
// min(T, slots). With timing on, a `<out>.timing.tsv` sidecar records
// per-sample wall-clock microseconds.
inline SummarizeStats summarize_corpus(const ModelParams& params, const Vocab& vocab,
                                       const std::vector<std::string>& lines,
                                       const SummarizeOptions& opts, const std::string& out_path) {
  if (lines.empty()) raise(ErrorKind::EmptyCorpus, "no sentences to summarize");
  if (opts.target_length < 1) raise(ErrorKind::ConfigError, "target length must be >= 1");
  SummarizeStats stats;
  stats.lines = lines.size();
  std::vector<std::string> out_lines(lines.size());
  std::vector<double> micros(lines.size(), 0.0);
  std::vector<uint8_t> clipped(lines.size(), 0);

  parallel_for(lines.size(), [&](size_t i) {
    auto ids = vocab.encode(tokenize(lines[i]));
    if (static_cast<int32_t>(ids.size()) > params.config.max_len) {
      ids.resize(static_cast<size_t>(params.config.max_len));
      clipped[i] = 1;
    }
    auto started = std::chrono::steady_clock::now();
    LogProbLattice lat = forward(params, ids);
    int32_t t_eff = std::min<int32_t>(opts.target_length, lat.slots);
    std::vector<int32_t> words;
    switch (opts.decoder) {
      case DecoderKind::greedy: words = decode::greedy_decode(lat); break;
      case DecoderKind::truncate: words = decode::truncate_decode(lat, t_eff); break;
      case DecoderKind::length_control:
        words = decode::length_control_decode(lat, t_eff, opts.beam, opts.mode);
        break;
      case DecoderKind::ctc_beam: words = decode::ctc_beam_search(lat, opts.beam); break;
    }
    auto finished = std::chrono::steady_clock::now();
    micros[i] = std::chrono::duration<double, std::micro>(finished - started).count();
    out_lines[i] = join_tokens(vocab.decode(words));
  });

  std::ofstream out(out_path, std::ios::binary);
  if (!out) raise(ErrorKind::IoError, "cannot write summaries: " + out_path);
  for (const auto& line : out_lines) out << line << '\n';
  if (!out) raise(ErrorKind::IoError, "short write to " + out_path);
  for (auto c : clipped) stats.truncated_inputs += c;

  if (opts.timing) {
    stats.micros = micros;
    std::ofstream tsv(out_path + ".timing.tsv", std::ios::binary);
    if (!tsv) raise(ErrorKind::IoError, "cannot write timing sidecar for " + out_path);
    for (size_t i = 0; i < micros.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%zu\t%.3f\n", i, micros[i]);
      tsv << buf;
    }
  }
  return stats;
}

inline std::vector<double> read_timing_seconds(const std::string& tsv_path) {
  std::ifstream in(tsv_path, std::ios::binary);
  std::vector<double> seconds;
  if (!in) return seconds;
  std::string line;
  while (std::getline(in, line)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    seconds.push_back(std::strtod(line.c_str() + tab + 1, nullptr) / 1e6);
  }
  return seconds;
}

inline nlohmann::json report_to_json(const rouge::RougeReport& report) {
  auto score = [](const rouge::Score& s) {
    return nlohmann::json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  };
  nlohmann::json j{
      {"protocol", report.protocol == rouge::Protocol::f1 ? "f1" : "truncated-recall"},
      {"n_samples", report.n_samples},
      {"rouge_1", score(report.r1)},
      {"rouge_2", score(report.r2)},
      {"rouge_l", score(report.rl)},
      {"total", report.total()},
      {"delta_r", report.delta_r},
  };
  if (report.has_timing) j["mean_seconds_per_sample"] = report.mean_seconds_per_sample;
  if (report.has_speedup) j["speedup"] = report.speedup;
  return j;
}

struct PipelineConfig {
  std::string corpus;
  std::string vectors;
  std::string workdir;
  uint64_t seed = 0;
  uint64_t vocab_min_count = 1;
  int lm_order = 4;
  double lm_k = 0.1;
  SearchConfig search;
  ModelConfig model;     // vocab_size is filled from the built vocabulary
  OptConfig opt;
  SummarizeOptions summarize;

  void validate() const {
    namespace fs = std::filesystem;
    if (!fs::exists(corpus)) raise(ErrorKind::ConfigError, "corpus file not found: " + corpus);
    if (!fs::exists(vectors)) raise(ErrorKind::ConfigError, "vectors file not found: " + vectors);
    if (workdir.empty()) raise(ErrorKind::ConfigError, "workdir is required");
    search.validate();
    opt.validate();
  }
};

// All five stages: train-lm -> search -> train-naus -> summarize ->
// evaluate, with every artifact hashed into workdir/manifest.json.
inline nlohmann::json run_pipeline(PipelineConfig config, std::ostream* log = &std::cerr) {
  config.validate();
  namespace fs = std::filesystem;
  fs::create_directories(config.workdir);
  auto path_in = [&](const char* name) { return (fs::path(config.workdir) / name).string(); };

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = config.seed;
  manifest["corpus"] = file_hash_hex(config.corpus);
  manifest["vectors"] = file_hash_hex(config.vectors);
  auto record = [&](const char* stage, const std::string& artifact) {
    manifest["stages"][stage][fs::path(artifact).filename().string()] = file_hash_hex(artifact);
  };

  auto lines = load_corpus_lines(config.corpus);
  if (lines.empty()) raise(ErrorKind::EmptyCorpus, "corpus is empty: " + config.corpus);

  // stage 1: train-lm (plus the shared vocabulary)
  if (log) *log << "[pipeline] train-lm over " << lines.size() << " sentences\n";
  std::string vocab_path = path_in("vocab.txt");
  std::string lm_path = path_in("lm.bin");
  Vocab vocab = build_vocab(lines, config.vocab_min_count);
  save_vocab(vocab, vocab_path);
  NGramLm lm = NGramLm::train_from_lines(lines, config.lm_order, config.lm_k);
  lm.save(lm_path);
  record("train-lm", vocab_path);
  record("train-lm", lm_path);

  // stage 2: search
  if (log) *log << "[pipeline] search (T=" << config.search.target_length << ")\n";
  EmbeddingTable table = EmbeddingTable::load(config.vectors);
  std::string pseudo_path = path_in("pseudo.tsv");
  SearchConfig sc = config.search;
  sc.rng_seed = mix_seed(config.seed, 0x5ea);
  batch_search(lines, sc, vocab, lm, table, pseudo_path);
  record("search", pseudo_path);

  // stage 3: train-naus
  if (log) *log << "[pipeline] train-naus\n";
  std::vector<TrainPair> dataset;
  std::vector<std::string> refs;
  {
    auto rows = read_lines_strict(pseudo_path);
    for (const auto& row : rows) {
      if (row.empty()) continue;
      auto tab1 = row.find('\t');
      auto tab2 = row.find('\t', tab1 + 1);
      if (tab1 == std::string::npos || tab2 == std::string::npos)
        raise(ErrorKind::ParseError, "bad pseudo-groundtruth row: " + row);
      std::string input = row.substr(0, tab1);
      std::string summary = row.substr(tab1 + 1, tab2 - tab1 - 1);
      dataset.push_back({vocab.encode(tokenize(input)), vocab.encode(tokenize(summary))});
      refs.push_back(summary);
    }
  }
  ModelConfig mc = config.model;
  mc.vocab_size = vocab.nonblank_size();
  OptConfig oc = config.opt;
  oc.seed = mix_seed(config.seed, 0x7a1);
  TrainResult trained = train(dataset, mc, oc, log);
  std::string ckpt_path = path_in("checkpoint.bin");
  save_checkpoint(trained.params, ckpt_path);
  record("train-naus", ckpt_path);

  // stage 4: summarize
  if (log) *log << "[pipeline] summarize\n";
  std::string summaries_path = path_in("summaries.txt");
  SummarizeOptions so = config.summarize;
  so.target_length = config.search.target_length;
  so.timing = true;
  summarize_corpus(trained.params, vocab, lines, so, summaries_path);
  record("summarize", summaries_path);
  record("summarize", summaries_path + ".timing.tsv");

  // stage 5: evaluate against the search pseudo-groundtruth
  if (log) *log << "[pipeline] evaluate\n";
  std::string refs_path = path_in("references.txt");
  {
    std::ofstream out(refs_path, std::ios::binary);
    for (const auto& r : refs) out << r << '\n';
  }
  auto seconds = read_timing_seconds(summaries_path + ".timing.tsv");
  auto report =
      rouge::corpus_eval(read_lines_strict(summaries_path), read_lines_strict(refs_path),
                         rouge::EvalOptions{}, &seconds);
  std::string report_path = path_in("report.json");
  {
    std::ofstream out(report_path, std::ios::binary);
    out << report_to_json(report).dump(2) << '\n';
  }
  record("evaluate", refs_path);
  record("evaluate", report_path);

  std::ofstream mf(path_in("manifest.json"), std::ios::binary);
  mf << manifest.dump(2) << '\n';
  if (!mf) raise(ErrorKind::IoError, "cannot write manifest");
  return manifest;
}

struct OracleCheckConfig {
  int trials = 1000;
  int max_slots = 6;
  int max_vocab = 3;
  uint64_t seed = 7;
};

// Overridable entry points so a harness can verify that injected faults
// are actually caught.
struct OracleHooks {
  std::function<double(const LogProbLattice&, const std::vector<int32_t>&)> marginal =
      [](const LogProbLattice& lat, const std::vector<int32_t>& y) {
        return ctc::marginal_log_prob(lat, y);
      };
  std::function<std::vector<int32_t>(const LogProbLattice&, int32_t)> lc_no_merge_b1 =
      [](const LogProbLattice& lat, int32_t t) {
        return decode::length_control_best_hypothesis(lat, t, 1, decode::CollapseMode::no_merge)
            .tokens;
      };
};

struct OracleCheckReport {
  int ctc_trials = 0;
  int ctc_failures = 0;
  int partition_failures = 0;
  int dp_trials = 0;
  int dp_failures = 0;
  std::string counterexample;  // debug-format lattice of the first failure
  std::vector<std::string> table5_lines;

  bool ok() const { return ctc_failures == 0 && partition_failures == 0 && dp_failures == 0; }
};

inline LogProbLattice appendix_counterexample_lattice() {
  // two slots over {I, like, coding} + blank
  return lattice_from_probs({{0.39, 0.4, 0.1, 0.11}, {0.1, 0.9, 0.0, 0.0}});
}

inline OracleCheckReport oracle_check(const OracleCheckConfig& cfg, const OracleHooks& hooks = {},
                                      std::ostream* log = nullptr) {
  OracleCheckReport report;
  Rng rng(mix_seed(cfg.seed, 0x0c1e));

  for (int trial = 0; trial < cfg.trials; ++trial) {
    int32_t slots = 1 + static_cast<int32_t>(rng.below(static_cast<uint64_t>(cfg.max_slots)));
    int32_t vocab = 2 + static_cast<int32_t>(rng.below(static_cast<uint64_t>(
                            std::max(1, cfg.max_vocab - 1))));
    LogProbLattice lat = random_lattice(slots, vocab, rng);

    // CTC marginal vs enumeration on a random feasible-length target
    ++report.ctc_trials;
    int32_t ty = 1 + static_cast<int32_t>(rng.below(static_cast<uint64_t>(slots)));
    std::vector<int32_t> target(static_cast<size_t>(ty));
    for (auto& y : target) y = static_cast<int32_t>(rng.below(static_cast<uint64_t>(vocab)));
    double dp = std::exp(hooks.marginal(lat, target));
    double brute = std::exp(ctc::brute_force_marginal(lat, target));
    bool ctc_ok = std::abs(dp - brute) < 1e-9;

    // partition: marginals over all reachable collapsed outputs sum to 1
    bool partition_ok = true;
    if (trial % 10 == 0) {
      std::map<std::vector<int32_t>, int> outputs;
      int64_t total = 1;
      for (int32_t s = 0; s < slots; ++s) total *= lat.width;
      std::vector<int32_t> seq(static_cast<size_t>(slots));
      for (int64_t code = 0; code < total; ++code) {
        int64_t c = code;
        for (int32_t s = 0; s < slots; ++s) {
          seq[s] = static_cast<int32_t>(c % lat.width);
          c /= lat.width;
        }
        outputs[ctc::collapse(seq, lat.blank())] = 1;
      }
      double sum = 0.0;
      for (const auto& [words, unused] : outputs) sum += std::exp(hooks.marginal(lat, words));
      partition_ok = std::abs(sum - 1.0) < 1e-9;
      if (!partition_ok) ++report.partition_failures;
    }

    // Theorem 1(1): exact decode without merging, every valid length
    ++report.dp_trials;
    bool dp_ok = true;
    for (int32_t t = 1; t <= slots; ++t) {
      auto got = hooks.lc_no_merge_b1(lat, t);
      auto want = decode::exhaustive_best(lat, t, decode::CollapseMode::no_merge);
      if (!want || got != want->tokens) {
        dp_ok = false;
        break;
      }
    }

    if (!ctc_ok) ++report.ctc_failures;
    if (!dp_ok) ++report.dp_failures;
    if ((!ctc_ok || !dp_ok || !partition_ok) && report.counterexample.empty())
      report.counterexample = lattice_to_text(lat);
  }

  // Appendix counterexample fixture: merging makes greedy DP inexact
  {
    LogProbLattice lat = appendix_counterexample_lattice();
    std::vector<std::string> names{"I", "like", "coding"};
    auto render = [&](const std::vector<int32_t>& ids) {
      std::string s;
      for (size_t i = 0; i < ids.size(); ++i) {
        if (i) s += ' ';
        s += names[static_cast<size_t>(ids[i])];
      }
      return s;
    };
    auto merged_b1 = decode::length_control_decode(lat, 2, 1, decode::CollapseMode::merge);
    auto best = decode::exhaustive_best(lat, 2, decode::CollapseMode::merge);
    report.table5_lines.push_back("length-control (merge, B=1): \"" + render(merged_b1) + "\"");
    report.table5_lines.push_back("exhaustive optimum (merge):  \"" + render(best->words) + "\"");
  }

  if (log) {
    *log << "ctc oracle:      " << (report.ctc_trials - report.ctc_failures) << "/"
         << report.ctc_trials << " ok\n";
    *log << "partition:       " << (report.partition_failures == 0 ? "ok" : "FAILED") << "\n";
    *log << "length-control:  " << (report.dp_trials - report.dp_failures) << "/"
         << report.dp_trials << " ok\n";
    for (const auto& line : report.table5_lines) *log << line << "\n";
    if (!report.counterexample.empty())
      *log << "counterexample lattice:\n" << report.counterexample;
  }
  return report;
}

}  // namespace naus
