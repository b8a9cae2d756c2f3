#pragma once

#include <cmath>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "naus/common.hpp"
#include "naus/model.hpp"

namespace naus {

struct OptConfig {
  double peak_lr = 5e-4;
  int32_t warmup_steps = 200;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-8;
  double weight_decay = 0.01;
  double lr_floor = 1e-9;
  int32_t epochs = 10;
  int32_t batch_size = 8;
  uint64_t seed = 0;

  void validate() const {
    if (warmup_steps < 1 || epochs < 1 || batch_size < 1 || peak_lr <= 0.0)
      raise(ErrorKind::ConfigError, "bad optimizer configuration");
  }
};

// Linear warmup to peak, then inverse square-root decay; never below the
// floor. step is 1-based.
inline double inverse_sqrt_lr(int64_t step, double peak, int32_t warmup, double floor = 1e-9) {
  if (step < 1) step = 1;
  double lr = step <= warmup
                  ? peak * static_cast<double>(step) / warmup
                  : peak * std::sqrt(static_cast<double>(warmup) / static_cast<double>(step));
  return lr < floor ? floor : lr;
}

struct TrainPair {
  std::vector<int32_t> input_ids;
  std::vector<int32_t> target_ids;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_mean_loss;
  size_t skipped_pairs = 0;
};

namespace detail {

// CTC reachability: needs one slot per word plus one separator per
// adjacent repeat.
inline bool target_fits(const TrainPair& p, int32_t max_len) {
  if (p.input_ids.empty() || p.target_ids.empty()) return false;
  if (static_cast<int32_t>(p.input_ids.size()) > max_len) return false;
  size_t need = p.target_ids.size();
  for (size_t i = 1; i < p.target_ids.size(); ++i)
    if (p.target_ids[i] == p.target_ids[i - 1]) ++need;
  return need <= p.input_ids.size();
}

struct AdamState {
  ModelParams m, v;
  int64_t step = 0;
};

inline std::vector<Matrix*> tensor_list(ModelParams& p) {
  std::vector<Matrix*> out;
  p.visit([&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

}  // namespace detail

// Single-threaded deterministic training loop: decoupled weight decay,
// gradients averaged over each batch in index order.
inline TrainResult train(const std::vector<TrainPair>& dataset, const ModelConfig& model_config,
                         const OptConfig& opt, std::ostream* log = &std::cerr) {
  opt.validate();
  model_config.validate();
  if (dataset.empty()) raise(ErrorKind::EmptyCorpus, "empty training dataset");

  std::vector<size_t> usable;
  for (size_t i = 0; i < dataset.size(); ++i)
    if (detail::target_fits(dataset[i], model_config.max_len)) usable.push_back(i);
  size_t skipped = dataset.size() - usable.size();
  if (skipped && log)
    *log << "train: skipped " << skipped << " of " << dataset.size()
         << " pairs (empty, over-long, or unreachable target)\n";
  if (usable.empty()) raise(ErrorKind::AllPairsSkipped, "no usable training pairs");

  TrainResult result;
  result.params = init_params(model_config, opt.seed);
  result.skipped_pairs = skipped;
  detail::AdamState adam;
  adam.m = zero_params(model_config);
  adam.v = zero_params(model_config);

  for (int32_t epoch = 0; epoch < opt.epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(opt.seed, 0xe70c + static_cast<uint64_t>(epoch)));
    std::vector<size_t> order = usable;
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double loss_sum = 0.0;
    size_t batch_from = 0;
    while (batch_from < order.size()) {
      size_t batch_to = std::min(batch_from + static_cast<size_t>(opt.batch_size), order.size());
      ModelParams grads = zero_params(model_config);
      double batch_loss = 0.0;
      for (size_t i = batch_from; i < batch_to; ++i) {
        const auto& pair = dataset[order[i]];
        batch_loss += loss_and_grad(result.params, pair.input_ids, pair.target_ids, grads);
      }
      double inv = 1.0 / static_cast<double>(batch_to - batch_from);
      loss_sum += batch_loss;

      ++adam.step;
      double lr = inverse_sqrt_lr(adam.step, opt.peak_lr, opt.warmup_steps, opt.lr_floor);
      double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(adam.step));
      double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(adam.step));
      auto weights = detail::tensor_list(result.params);
      auto ms = detail::tensor_list(adam.m);
      auto vs = detail::tensor_list(adam.v);
      auto gs = detail::tensor_list(grads);
      for (size_t ti = 0; ti < weights.size(); ++ti) {
        Matrix& w = *weights[ti];
        Matrix& m = *ms[ti];
        Matrix& v = *vs[ti];
        const Matrix& g0 = *gs[ti];
        for (size_t j = 0; j < w.a.size(); ++j) {
          double g = g0.a[j] * inv;
          m.a[j] = opt.beta1 * m.a[j] + (1.0 - opt.beta1) * g;
          v.a[j] = opt.beta2 * v.a[j] + (1.0 - opt.beta2) * g * g;
          double mhat = m.a[j] / bc1;
          double vhat = v.a[j] / bc2;
          w.a[j] -= lr * (mhat / (std::sqrt(vhat) + opt.adam_eps) + opt.weight_decay * w.a[j]);
        }
      }
      batch_from = batch_to;
    }
    result.epoch_mean_loss.push_back(loss_sum / static_cast<double>(order.size()));
    if (log)
      *log << "epoch " << (epoch + 1) << "/" << opt.epochs << ": mean loss "
           << result.epoch_mean_loss.back() << "\n";
  }
  return result;
}

}  // namespace naus
