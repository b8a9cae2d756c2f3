// naus: search-and-learn unsupervised sentence summarization.
//
// Subcommands cover the full pipeline (train-lm, search, train-naus,
// summarize, evaluate), a one-shot `pipeline` driver, and `oracle-check`
// for the decoding/CTC self-verification suites.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "naus/pipeline.hpp"

namespace {

int run_train_lm(const std::string& corpus, const std::string& out, int order, double k) {
  auto lines = naus::load_corpus_lines(corpus);
  auto lm = naus::NGramLm::train_from_lines(lines, order, k);
  lm.save(out);
  std::cerr << "trained order-" << order << " LM on " << lines.size() << " sentences ("
            << lm.vocab_size() << " word types) -> " << out << "\n";
  return 0;
}

struct SearchArgs {
  std::string corpus, lm, vectors, out, vocab_out;
  naus::SearchConfig config;
  uint64_t min_count = 1;
};

int run_search(const SearchArgs& args) {
  auto lines = naus::load_corpus_lines(args.corpus);
  auto lm = naus::NGramLm::load(args.lm);
  auto table = naus::EmbeddingTable::load(args.vectors);
  naus::Vocab vocab = naus::build_vocab(lines, args.min_count);
  if (!args.vocab_out.empty()) naus::save_vocab(vocab, args.vocab_out);
  size_t n = naus::batch_search(lines, args.config, vocab, lm, table, args.out);
  std::cerr << "wrote " << n << " pseudo-groundtruth rows -> " << args.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string data, vocab_in, vocab_out, out;
  naus::ModelConfig model;
  naus::OptConfig opt;
  uint64_t min_count = 1;
  std::string positional = "sinusoidal";
};

int run_train_naus(TrainArgs args) {
  auto rows = naus::read_lines_strict(args.data);
  std::vector<std::string> inputs, summaries;
  for (const auto& row : rows) {
    if (row.empty()) continue;
    auto tab1 = row.find('\t');
    auto tab2 = row.find('\t', tab1 + 1);
    if (tab1 == std::string::npos)
      naus::raise(naus::ErrorKind::ParseError, "data row without tab: " + row);
    inputs.push_back(row.substr(0, tab1));
    summaries.push_back(tab2 == std::string::npos ? row.substr(tab1 + 1)
                                                  : row.substr(tab1 + 1, tab2 - tab1 - 1));
  }
  if (inputs.empty()) naus::raise(naus::ErrorKind::EmptyCorpus, "no training rows in " + args.data);

  naus::Vocab vocab = args.vocab_in.empty() ? naus::build_vocab(inputs, args.min_count)
                                            : naus::load_vocab(args.vocab_in);
  if (!args.vocab_out.empty()) naus::save_vocab(vocab, args.vocab_out);

  std::vector<naus::TrainPair> dataset;
  dataset.reserve(inputs.size());
  for (size_t i = 0; i < inputs.size(); ++i)
    dataset.push_back({vocab.encode(naus::tokenize(inputs[i])),
                       vocab.encode(naus::tokenize(summaries[i]))});

  args.model.positional = naus::positional_from_name(args.positional);
  args.model.vocab_size = vocab.nonblank_size();
  auto result = naus::train(dataset, args.model, args.opt);
  naus::save_checkpoint(result.params, args.out);
  std::cerr << "saved checkpoint -> " << args.out << "\n";
  return 0;
}

struct SummarizeArgs {
  std::string model, vocab, input, out;
  naus::SummarizeOptions opts;
  std::string decoder = "length-control";
  std::string mode = "merge";
};

int run_summarize(SummarizeArgs args) {
  args.opts.decoder = naus::decoder_from_name(args.decoder);
  args.opts.mode = args.mode == "no_merge" ? naus::decode::CollapseMode::no_merge
                                           : naus::decode::CollapseMode::merge;
  auto params = naus::load_checkpoint(args.model);
  if (args.opts.target_length > params.config.max_len)
    naus::raise(naus::ErrorKind::ConfigError,
                "--length exceeds the model's max_len (" +
                    std::to_string(params.config.max_len) + ")");
  auto vocab = naus::load_vocab(args.vocab);
  if (vocab.nonblank_size() != params.config.vocab_size)
    naus::raise(naus::ErrorKind::ConfigError, "vocab size does not match the checkpoint");
  auto lines = naus::load_corpus_lines(args.input);
  auto stats = naus::summarize_corpus(params, vocab, lines, args.opts, args.out);
  std::cerr << "summarized " << stats.lines << " sentences -> " << args.out;
  if (stats.truncated_inputs)
    std::cerr << " (" << stats.truncated_inputs << " inputs clipped to max_len)";
  std::cerr << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string pred, ref, baseline, out;
  std::string protocol = "f1";
  size_t char_budget = 75;
  bool budget_bytes = false;
};

int run_evaluate(const EvaluateArgs& args) {
  naus::rouge::EvalOptions opts;
  if (args.protocol == "f1") {
    opts.protocol = naus::rouge::Protocol::f1;
  } else if (args.protocol == "truncated-recall") {
    opts.protocol = naus::rouge::Protocol::truncated_recall;
  } else {
    naus::raise(naus::ErrorKind::ConfigError, "unknown protocol: " + args.protocol);
  }
  opts.char_budget = args.char_budget;
  opts.budget_bytes = args.budget_bytes;

  if (!args.baseline.empty()) {
    std::ifstream in(args.baseline);
    if (!in) naus::raise(naus::ErrorKind::IoError, "cannot open baseline report: " + args.baseline);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
      naus::raise(naus::ErrorKind::ParseError, "baseline report is not valid JSON");
    if (j.contains("total")) {
      opts.has_baseline_total = true;
      opts.baseline_total = j["total"].get<double>();
    }
    if (j.contains("mean_seconds_per_sample")) {
      opts.has_baseline_seconds = true;
      opts.baseline_seconds = j["mean_seconds_per_sample"].get<double>();
    }
  }

  auto seconds = naus::read_timing_seconds(args.pred + ".timing.tsv");
  auto report = naus::rouge::corpus_eval(naus::read_lines_strict(args.pred),
                                         naus::read_lines_strict(args.ref), opts,
                                         seconds.empty() ? nullptr : &seconds);
  auto j = naus::report_to_json(report);
  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) naus::raise(naus::ErrorKind::IoError, "cannot write report: " + args.out);
    out << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << std::endl;
  return 0;
}

int run_oracle_check(const naus::OracleCheckConfig& cfg) {
  auto report = naus::oracle_check(cfg, {}, &std::cout);
  if (!report.ok()) {
    std::cerr << "oracle mismatch detected\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"search-and-learn unsupervised summarization"};
  app.require_subcommand(1);

  // train-lm
  auto* lm_cmd = app.add_subcommand("train-lm", "train the add-k n-gram language model");
  std::string lm_corpus, lm_out;
  int lm_order = 4;
  double lm_k = 0.1;
  lm_cmd->add_option("--corpus", lm_corpus, "training corpus, one sentence per line")->required();
  lm_cmd->add_option("--out", lm_out, "output LM file")->required();
  lm_cmd->add_option("--order", lm_order, "n-gram order (1-5)");
  lm_cmd->add_option("--k", lm_k, "add-k smoothing constant");

  // search
  auto* search_cmd = app.add_subcommand("search", "hill-climbing pseudo-groundtruth search");
  SearchArgs sa;
  search_cmd->add_option("--corpus", sa.corpus, "input corpus")->required();
  search_cmd->add_option("--lm", sa.lm, "language model file")->required();
  search_cmd->add_option("--vectors", sa.vectors, "word vector file")->required();
  search_cmd->add_option("--out", sa.out, "output TSV")->required();
  search_cmd->add_option("--length", sa.config.target_length, "summary length T");
  search_cmd->add_option("--gamma", sa.config.gamma, "similarity weight");
  search_cmd->add_option("--steps", sa.config.steps, "proposals per restart");
  search_cmd->add_option("--restarts", sa.config.restarts, "random restarts");
  search_cmd->add_option("--seed", sa.config.rng_seed, "random seed");
  search_cmd->add_option("--save-vocab", sa.vocab_out, "also write the corpus vocabulary here");
  search_cmd->add_option("--min-count", sa.min_count, "vocabulary frequency threshold");

  // train-naus
  auto* train_cmd = app.add_subcommand("train-naus", "CTC-train the encoder-only model");
  TrainArgs ta;
  train_cmd->add_option("--data", ta.data, "pseudo-groundtruth TSV")->required();
  train_cmd->add_option("--out", ta.out, "output checkpoint")->required();
  train_cmd->add_option("--vocab", ta.vocab_in, "existing vocabulary file");
  train_cmd->add_option("--save-vocab", ta.vocab_out, "write the vocabulary used");
  train_cmd->add_option("--min-count", ta.min_count, "vocabulary threshold when building");
  train_cmd->add_option("--layers", ta.model.layers, "encoder layers");
  train_cmd->add_option("--heads", ta.model.heads, "attention heads");
  train_cmd->add_option("--dim", ta.model.model_dim, "model dimension");
  train_cmd->add_option("--ffn", ta.model.ffn_dim, "feed-forward dimension");
  train_cmd->add_option("--max-len", ta.model.max_len, "maximum input length");
  train_cmd->add_option("--positional", ta.positional, "sinusoidal|learned|none");
  train_cmd->add_option("--lr", ta.opt.peak_lr, "peak learning rate");
  train_cmd->add_option("--warmup", ta.opt.warmup_steps, "warmup steps");
  train_cmd->add_option("--epochs", ta.opt.epochs, "training epochs");
  train_cmd->add_option("--batch", ta.opt.batch_size, "batch size");
  train_cmd->add_option("--seed", ta.opt.seed, "random seed");

  // summarize
  auto* sum_cmd = app.add_subcommand("summarize", "decode summaries from a checkpoint");
  SummarizeArgs ma;
  sum_cmd->add_option("--model", ma.model, "checkpoint file")->required();
  sum_cmd->add_option("--vocab", ma.vocab, "vocabulary file")->required();
  sum_cmd->add_option("--input", ma.input, "input corpus")->required();
  sum_cmd->add_option("--out", ma.out, "output summaries, one per line")->required();
  sum_cmd->add_option("--length", ma.opts.target_length, "target summary length T");
  sum_cmd->add_option("--beam", ma.opts.beam, "beam size B");
  sum_cmd->add_option("--decoder", ma.decoder, "greedy|truncate|length-control|ctc-beam");
  sum_cmd->add_option("--mode", ma.mode, "merge|no_merge collapse mode");
  sum_cmd->add_flag("--timing", ma.opts.timing, "write per-sample microseconds sidecar TSV");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "ROUGE evaluation");
  EvaluateArgs ea;
  eval_cmd->add_option("--pred", ea.pred, "predictions file")->required();
  eval_cmd->add_option("--ref", ea.ref, "references file")->required();
  eval_cmd->add_option("--protocol", ea.protocol, "f1|truncated-recall");
  eval_cmd->add_option("--char-budget", ea.char_budget, "truncation budget");
  eval_cmd->add_flag("--budget-bytes", ea.budget_bytes, "budget counts bytes, not characters");
  eval_cmd->add_option("--baseline", ea.baseline, "baseline report.json for delta-R/speedup");
  eval_cmd->add_option("--out", ea.out, "also write the JSON report here");

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "run all five stages into a workdir");
  pipe_cmd->set_config("--config", "", "key=value configuration file");
  naus::PipelineConfig pc;
  std::string pipe_mode = "merge";
  pipe_cmd->add_option("--corpus", pc.corpus, "input corpus")->required();
  pipe_cmd->add_option("--vectors", pc.vectors, "word vector file")->required();
  pipe_cmd->add_option("--workdir", pc.workdir, "artifact directory")->required();
  pipe_cmd->add_option("--seed", pc.seed, "master seed");
  pipe_cmd->add_option("--min-count", pc.vocab_min_count, "vocabulary threshold");
  pipe_cmd->add_option("--lm-order", pc.lm_order, "LM order");
  pipe_cmd->add_option("--lm-k", pc.lm_k, "LM smoothing");
  pipe_cmd->add_option("--length", pc.search.target_length, "summary length T");
  pipe_cmd->add_option("--gamma", pc.search.gamma, "similarity weight");
  pipe_cmd->add_option("--steps", pc.search.steps, "search proposals per restart");
  pipe_cmd->add_option("--restarts", pc.search.restarts, "search restarts");
  pipe_cmd->add_option("--layers", pc.model.layers, "encoder layers");
  pipe_cmd->add_option("--heads", pc.model.heads, "attention heads");
  pipe_cmd->add_option("--dim", pc.model.model_dim, "model dimension");
  pipe_cmd->add_option("--ffn", pc.model.ffn_dim, "feed-forward dimension");
  pipe_cmd->add_option("--max-len", pc.model.max_len, "maximum input length");
  pipe_cmd->add_option("--lr", pc.opt.peak_lr, "peak learning rate");
  pipe_cmd->add_option("--warmup", pc.opt.warmup_steps, "warmup steps");
  pipe_cmd->add_option("--epochs", pc.opt.epochs, "training epochs");
  pipe_cmd->add_option("--batch", pc.opt.batch_size, "batch size");
  pipe_cmd->add_option("--beam", pc.summarize.beam, "decoding beam size");
  pipe_cmd->add_option("--mode", pipe_mode, "merge|no_merge collapse mode");

  // oracle-check
  auto* oracle_cmd = app.add_subcommand("oracle-check", "run the CTC/decode oracle suites");
  naus::OracleCheckConfig oc;
  oracle_cmd->add_option("--trials", oc.trials, "random instances");
  oracle_cmd->add_option("--max-slots", oc.max_slots, "maximum S");
  oracle_cmd->add_option("--max-vocab", oc.max_vocab, "maximum V");
  oracle_cmd->add_option("--seed", oc.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*lm_cmd) return run_train_lm(lm_corpus, lm_out, lm_order, lm_k);
    if (*search_cmd) return run_search(sa);
    if (*train_cmd) return run_train_naus(ta);
    if (*sum_cmd) return run_summarize(ma);
    if (*eval_cmd) return run_evaluate(ea);
    if (*pipe_cmd) {
      pc.summarize.mode = pipe_mode == "no_merge" ? naus::decode::CollapseMode::no_merge
                                                  : naus::decode::CollapseMode::merge;
      naus::run_pipeline(pc);
      return 0;
    }
    if (*oracle_cmd) return run_oracle_check(oc);
  } catch (const naus::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind == naus::ErrorKind::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
