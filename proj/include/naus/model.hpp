#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "naus/binio.hpp"
#include "naus/common.hpp"
#include "naus/ctc.hpp"
#include "naus/lattice.hpp"
#include "naus/matrix.hpp"

namespace naus {

enum class Positional { sinusoidal, learned, none };

inline const char* positional_name(Positional p) {
  switch (p) {
    case Positional::sinusoidal: return "sinusoidal";
    case Positional::learned: return "learned";
    default: return "none";
  }
}

inline Positional positional_from_name(const std::string& s) {
  if (s == "sinusoidal") return Positional::sinusoidal;
  if (s == "learned") return Positional::learned;
  if (s == "none") return Positional::none;
  raise(ErrorKind::ConfigError, "unknown positional encoding: " + s);
}

struct ModelConfig {
  int32_t layers = 2;
  int32_t heads = 2;
  int32_t model_dim = 64;
  int32_t ffn_dim = 128;
  int32_t vocab_size = 0;  // V, excluding the blank; lattice width is V+1
  int32_t max_len = 64;
  Positional positional = Positional::sinusoidal;

  int32_t attn_dim() const { return model_dim / heads; }

  void validate() const {
    if (layers < 1 || heads < 1 || model_dim < 1 || ffn_dim < 1 || max_len < 1)
      raise(ErrorKind::ConfigError, "model dimensions must be positive");
    if (model_dim % heads != 0)
      raise(ErrorKind::ConfigError, "model_dim must be divisible by heads");
    if (vocab_size < 1) raise(ErrorKind::ConfigError, "vocab_size must be >= 1");
  }
};

struct LayerParams {
  Matrix w_q, w_k, w_v, w_o;      // d x d
  Matrix ln1_gain, ln1_bias;      // 1 x d
  Matrix ffn_w1;                  // d x ffn
  Matrix ffn_b1;                  // 1 x ffn
  Matrix ffn_w2;                  // ffn x d
  Matrix ffn_b2;                  // 1 x d
  Matrix ln2_gain, ln2_bias;      // 1 x d
};

// All model weights. Tensor traversal order (visit) defines the
// checkpoint block order.
struct ModelParams {
  ModelConfig config;
  Matrix tok_embed;  // (V+1) x d
  Matrix pos_embed;  // max_len x d, learned mode only
  std::vector<LayerParams> layers;
  Matrix out_proj;   // d x (V+1)

  template <typename F>
  void visit(F&& f) {
    f("tok_embed", tok_embed);
    if (config.positional == Positional::learned) f("pos_embed", pos_embed);
    for (size_t l = 0; l < layers.size(); ++l) {
      auto& lay = layers[l];
      std::string p = "layer" + std::to_string(l) + ".";
      f(p + "w_q", lay.w_q);
      f(p + "w_k", lay.w_k);
      f(p + "w_v", lay.w_v);
      f(p + "w_o", lay.w_o);
      f(p + "ln1_gain", lay.ln1_gain);
      f(p + "ln1_bias", lay.ln1_bias);
      f(p + "ffn_w1", lay.ffn_w1);
      f(p + "ffn_b1", lay.ffn_b1);
      f(p + "ffn_w2", lay.ffn_w2);
      f(p + "ffn_b2", lay.ffn_b2);
      f(p + "ln2_gain", lay.ln2_gain);
      f(p + "ln2_bias", lay.ln2_bias);
    }
    f("out_proj", out_proj);
  }

  template <typename F>
  void visit(F&& f) const {
    const_cast<ModelParams*>(this)->visit(
        [&](const std::string& name, Matrix& m) { f(name, static_cast<const Matrix&>(m)); });
  }

  size_t param_count() const {
    size_t n = 0;
    visit([&](const std::string&, const Matrix& m) { n += m.size(); });
    return n;
  }
};

inline ModelParams zero_params(const ModelConfig& config) {
  config.validate();
  ModelParams p;
  p.config = config;
  int32_t d = config.model_dim;
  int32_t w = config.vocab_size + 1;
  p.tok_embed = Matrix(w, d);
  if (config.positional == Positional::learned) p.pos_embed = Matrix(config.max_len, d);
  p.layers.resize(static_cast<size_t>(config.layers));
  for (auto& lay : p.layers) {
    lay.w_q = Matrix(d, d);
    lay.w_k = Matrix(d, d);
    lay.w_v = Matrix(d, d);
    lay.w_o = Matrix(d, d);
    lay.ln1_gain = Matrix(1, d);
    lay.ln1_bias = Matrix(1, d);
    lay.ffn_w1 = Matrix(d, config.ffn_dim);
    lay.ffn_b1 = Matrix(1, config.ffn_dim);
    lay.ffn_w2 = Matrix(config.ffn_dim, d);
    lay.ffn_b2 = Matrix(1, d);
    lay.ln2_gain = Matrix(1, d);
    lay.ln2_bias = Matrix(1, d);
  }
  p.out_proj = Matrix(d, w);
  return p;
}

// Xavier-uniform weights, unit layernorm gains, zero biases. Values are
// snapped to the f32 grid so a checkpoint round trip is lossless.
inline ModelParams init_params(const ModelConfig& config, uint64_t seed) {
  ModelParams p = zero_params(config);
  Rng rng(mix_seed(seed, 0x1417));
  auto snap = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  p.visit([&](const std::string& name, Matrix& m) {
    bool is_gain = name.find("gain") != std::string::npos;
    bool is_bias = name.find("bias") != std::string::npos || name.find("_b") != std::string::npos;
    if (is_gain) {
      m.fill(1.0);
    } else if (is_bias) {
      m.fill(0.0);
    } else {
      double bound = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
      for (auto& v : m.a) v = snap(rng.uniform(-bound, bound));
    }
  });
  return p;
}

namespace detail {

struct LnCache {
  Matrix xhat;
  std::vector<double> inv_std;
};

inline Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, LnCache& cache) {
  constexpr double eps = 1e-5;
  Matrix out(x.rows, x.cols);
  cache.xhat = Matrix(x.rows, x.cols);
  cache.inv_std.assign(static_cast<size_t>(x.rows), 0.0);
  for (int32_t i = 0; i < x.rows; ++i) {
    double mu = 0.0;
    for (int32_t j = 0; j < x.cols; ++j) mu += x(i, j);
    mu /= x.cols;
    double var = 0.0;
    for (int32_t j = 0; j < x.cols; ++j) {
      double dlt = x(i, j) - mu;
      var += dlt * dlt;
    }
    var /= x.cols;
    double inv = 1.0 / std::sqrt(var + eps);
    cache.inv_std[static_cast<size_t>(i)] = inv;
    for (int32_t j = 0; j < x.cols; ++j) {
      double xh = (x(i, j) - mu) * inv;
      cache.xhat(i, j) = xh;
      out(i, j) = gain(0, j) * xh + bias(0, j);
    }
  }
  return out;
}

inline Matrix layer_norm_backward(const Matrix& dout, const Matrix& gain, const LnCache& cache,
                                  Matrix& dgain, Matrix& dbias) {
  Matrix dx(dout.rows, dout.cols);
  for (int32_t i = 0; i < dout.rows; ++i) {
    double m1 = 0.0, m2 = 0.0;
    for (int32_t j = 0; j < dout.cols; ++j) {
      double dxh = dout(i, j) * gain(0, j);
      m1 += dxh;
      m2 += dxh * cache.xhat(i, j);
      dgain(0, j) += dout(i, j) * cache.xhat(i, j);
      dbias(0, j) += dout(i, j);
    }
    m1 /= dout.cols;
    m2 /= dout.cols;
    double inv = cache.inv_std[static_cast<size_t>(i)];
    for (int32_t j = 0; j < dout.cols; ++j) {
      double dxh = dout(i, j) * gain(0, j);
      dx(i, j) = inv * (dxh - m1 - cache.xhat(i, j) * m2);
    }
  }
  return dx;
}

struct HeadCache {
  Matrix q, k, v;  // S x d_k
  Matrix p;        // S x S attention weights
};

struct LayerCache {
  Matrix x_in;
  Matrix q_full, k_full, v_full;  // S x d
  std::vector<HeadCache> heads;
  Matrix concat;    // S x d, pre-w_o
  Matrix attn_out;  // S x d
  LnCache ln1;
  Matrix abar;
  Matrix ffn_pre;   // S x ffn
  Matrix ffn_act;   // relu
  LnCache ln2;
  Matrix x_out;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  Matrix logits;
  std::vector<double> row_lse;
};

inline Matrix cols_slice(const Matrix& m, int32_t c0, int32_t c1) {
  Matrix out(m.rows, c1 - c0);
  for (int32_t i = 0; i < m.rows; ++i)
    for (int32_t j = c0; j < c1; ++j) out(i, j - c0) = m(i, j);
  return out;
}

inline void cols_accumulate(Matrix& dst, const Matrix& part, int32_t c0) {
  for (int32_t i = 0; i < dst.rows; ++i)
    for (int32_t j = 0; j < part.cols; ++j) dst(i, c0 + j) += part(i, j);
}

inline void sinusoidal_position(Matrix& x) {
  int32_t d = x.cols;
  for (int32_t pos = 0; pos < x.rows; ++pos)
    for (int32_t j = 0; j < d; ++j) {
      double angle = pos * std::exp(-std::log(10000.0) * (2.0 * (j / 2)) / d);
      x(pos, j) += (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
}

}  // namespace detail

inline LogProbLattice forward_cached(const ModelParams& params, const std::vector<int32_t>& ids,
                                     detail::ForwardCache& cache) {
  const ModelConfig& cfg = params.config;
  int32_t S = static_cast<int32_t>(ids.size());
  if (S == 0) raise(ErrorKind::EmptyInput, "forward needs at least one token");
  if (S > cfg.max_len)
    raise(ErrorKind::SequenceTooLong, "sequence of " + std::to_string(S) +
                                          " tokens exceeds max_len " + std::to_string(cfg.max_len));
  int32_t d = cfg.model_dim;
  int32_t dk = cfg.attn_dim();
  double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  Matrix x(S, d);
  for (int32_t s = 0; s < S; ++s) {
    int32_t id = ids[static_cast<size_t>(s)];
    if (id < 0 || id > cfg.vocab_size) raise(ErrorKind::InvalidId, "token id out of range");
    for (int32_t j = 0; j < d; ++j) x(s, j) = params.tok_embed(id, j);
  }
  if (cfg.positional == Positional::sinusoidal) {
    detail::sinusoidal_position(x);
  } else if (cfg.positional == Positional::learned) {
    for (int32_t s = 0; s < S; ++s)
      for (int32_t j = 0; j < d; ++j) x(s, j) += params.pos_embed(s, j);
  }

  cache.layers.clear();
  cache.layers.resize(params.layers.size());
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const auto& lay = params.layers[l];
    auto& lc = cache.layers[l];
    lc.x_in = x;
    lc.q_full = matmul(x, lay.w_q);
    lc.k_full = matmul(x, lay.w_k);
    lc.v_full = matmul(x, lay.w_v);
    lc.heads.resize(static_cast<size_t>(cfg.heads));
    lc.concat = Matrix(S, d);
    for (int32_t h = 0; h < cfg.heads; ++h) {
      auto& hc = lc.heads[static_cast<size_t>(h)];
      hc.q = detail::cols_slice(lc.q_full, h * dk, (h + 1) * dk);
      hc.k = detail::cols_slice(lc.k_full, h * dk, (h + 1) * dk);
      hc.v = detail::cols_slice(lc.v_full, h * dk, (h + 1) * dk);
      Matrix scores = matmul_nt(hc.q, hc.k);
      for (auto& v : scores.a) v *= scale;
      hc.p = Matrix(S, S);
      for (int32_t i = 0; i < S; ++i) {
        double mx = scores(i, 0);
        for (int32_t j = 1; j < S; ++j) mx = std::max(mx, scores(i, j));
        double z = 0.0;
        for (int32_t j = 0; j < S; ++j) z += std::exp(scores(i, j) - mx);
        for (int32_t j = 0; j < S; ++j) hc.p(i, j) = std::exp(scores(i, j) - mx) / z;
      }
      Matrix ctx = matmul(hc.p, hc.v);
      detail::cols_accumulate(lc.concat, ctx, h * dk);
    }
    lc.attn_out = matmul(lc.concat, lay.w_o);
    Matrix res1 = add(lc.x_in, lc.attn_out);
    lc.abar = detail::layer_norm(res1, lay.ln1_gain, lay.ln1_bias, lc.ln1);

    lc.ffn_pre = matmul(lc.abar, lay.ffn_w1);
    for (int32_t i = 0; i < S; ++i)
      for (int32_t j = 0; j < cfg.ffn_dim; ++j) lc.ffn_pre(i, j) += lay.ffn_b1(0, j);
    lc.ffn_act = lc.ffn_pre;
    for (auto& v : lc.ffn_act.a) v = v > 0.0 ? v : 0.0;
    Matrix ffn_out = matmul(lc.ffn_act, lay.ffn_w2);
    for (int32_t i = 0; i < S; ++i)
      for (int32_t j = 0; j < d; ++j) ffn_out(i, j) += lay.ffn_b2(0, j);
    Matrix res2 = add(lc.abar, ffn_out);
    lc.x_out = detail::layer_norm(res2, lay.ln2_gain, lay.ln2_bias, lc.ln2);
    x = lc.x_out;
  }

  cache.logits = matmul(x, params.out_proj);
  cache.row_lse.assign(static_cast<size_t>(S), 0.0);
  LogProbLattice lat(S, cfg.vocab_size + 1);
  for (int32_t s = 0; s < S; ++s) {
    double mx = cache.logits(s, 0);
    for (int32_t v = 1; v < lat.width; ++v) mx = std::max(mx, cache.logits(s, v));
    double z = 0.0;
    for (int32_t v = 0; v < lat.width; ++v) z += std::exp(cache.logits(s, v) - mx);
    double lse = mx + std::log(z);
    cache.row_lse[static_cast<size_t>(s)] = lse;
    for (int32_t v = 0; v < lat.width; ++v) lat.at(s, v) = cache.logits(s, v) - lse;
  }
  return lat;
}

inline LogProbLattice forward(const ModelParams& params, const std::vector<int32_t>& ids) {
  detail::ForwardCache cache;
  return forward_cached(params, ids, cache);
}

// d(logP)/d(lattice log-prob): reverse pass over the alpha recursion.
inline Matrix ctc_log_prob_grad(const LogProbLattice& lat, const std::vector<int32_t>& target,
                                double& out_logp) {
  ctc::AlphaTable a = ctc::forward_alphas(lat, target);
  int32_t S = lat.slots;
  int32_t Ty = a.target_len;
  double logp = log_add_exp(a.a_eps(S, Ty), a.a_non(S, Ty));
  if (logp == kNegInf)
    raise(ErrorKind::TargetTooLong, "target is unreachable from this lattice");
  out_logp = logp;

  std::vector<double> g_eps(a.eps.size(), 0.0), g_non(a.noneps.size(), 0.0);
  auto ge = [&](int32_t s, int32_t t) -> double& {
    return g_eps[static_cast<size_t>(s) * (Ty + 1) + t];
  };
  auto gn = [&](int32_t s, int32_t t) -> double& {
    return g_non[static_cast<size_t>(s) * (Ty + 1) + t];
  };
  ge(S, Ty) = a.a_eps(S, Ty) == kNegInf ? 0.0 : std::exp(a.a_eps(S, Ty) - logp);
  gn(S, Ty) = a.a_non(S, Ty) == kNegInf ? 0.0 : std::exp(a.a_non(S, Ty) - logp);

  Matrix grad(S, lat.width);
  for (int32_t s = S; s >= 1; --s) {
    int32_t t_hi = std::min(s, Ty);
    for (int32_t t = 0; t <= t_hi; ++t) {
      double g = ge(s, t);
      if (g != 0.0 && a.a_eps(s, t) != kNegInf) {
        double inner = a.a_eps(s, t) - lat.at(s - 1, lat.blank());
        grad(s - 1, lat.blank()) += g;
        if (a.a_eps(s - 1, t) != kNegInf) ge(s - 1, t) += g * std::exp(a.a_eps(s - 1, t) - inner);
        if (a.a_non(s - 1, t) != kNegInf) gn(s - 1, t) += g * std::exp(a.a_non(s - 1, t) - inner);
      }
      g = gn(s, t);
      if (t >= 1 && g != 0.0 && a.a_non(s, t) != kNegInf) {
        int32_t y = target[static_cast<size_t>(t) - 1];
        double inner = a.a_non(s, t) - lat.at(s - 1, y);
        grad(s - 1, y) += g;
        if (a.a_eps(s - 1, t - 1) != kNegInf)
          ge(s - 1, t - 1) += g * std::exp(a.a_eps(s - 1, t - 1) - inner);
        if (a.a_non(s - 1, t) != kNegInf) gn(s - 1, t) += g * std::exp(a.a_non(s - 1, t) - inner);
        bool repeated = t >= 2 && target[static_cast<size_t>(t) - 1] == target[static_cast<size_t>(t) - 2];
        if (!repeated && a.a_non(s - 1, t - 1) != kNegInf)
          gn(s - 1, t - 1) += g * std::exp(a.a_non(s - 1, t - 1) - inner);
      }
    }
  }
  return grad;
}

// nll = -log P(target | ids) with exact analytic gradients for every
// parameter tensor.
inline double loss_and_grad(const ModelParams& params, const std::vector<int32_t>& ids,
                            const std::vector<int32_t>& target, ModelParams& grads) {
  const ModelConfig& cfg = params.config;
  detail::ForwardCache cache;
  LogProbLattice lat = forward_cached(params, ids, cache);
  double logp = 0.0;
  Matrix g_logp = ctc_log_prob_grad(lat, target, logp);
  double nll = -logp;

  int32_t S = lat.slots;
  int32_t d = cfg.model_dim;
  int32_t dk = cfg.attn_dim();
  double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  // through the row-wise log-softmax; dL/dlogp = -g_logp
  Matrix dlogits(S, lat.width);
  for (int32_t s = 0; s < S; ++s) {
    double gsum = 0.0;
    for (int32_t v = 0; v < lat.width; ++v) gsum += -g_logp(s, v);
    for (int32_t v = 0; v < lat.width; ++v) {
      double p = std::exp(lat.at(s, v));
      dlogits(s, v) = -g_logp(s, v) - p * gsum;
    }
  }

  add_inplace(grads.out_proj, matmul_tn(cache.layers.back().x_out, dlogits));
  Matrix dx = matmul_nt(dlogits, params.out_proj);

  for (int32_t l = cfg.layers - 1; l >= 0; --l) {
    const auto& lay = params.layers[static_cast<size_t>(l)];
    auto& glay = grads.layers[static_cast<size_t>(l)];
    const auto& lc = cache.layers[static_cast<size_t>(l)];

    // ln2(abar + ffn_out)
    Matrix dres2 = detail::layer_norm_backward(dx, lay.ln2_gain, lc.ln2, glay.ln2_gain, glay.ln2_bias);
    Matrix dabar = dres2;  // residual branch
    // ffn branch
    Matrix dffn_out = dres2;
    add_inplace(glay.ffn_w2, matmul_tn(lc.ffn_act, dffn_out));
    for (int32_t i = 0; i < S; ++i)
      for (int32_t j = 0; j < d; ++j) glay.ffn_b2(0, j) += dffn_out(i, j);
    Matrix dact = matmul_nt(dffn_out, lay.ffn_w2);
    for (size_t i = 0; i < dact.a.size(); ++i)
      if (lc.ffn_pre.a[i] <= 0.0) dact.a[i] = 0.0;
    add_inplace(glay.ffn_w1, matmul_tn(lc.abar, dact));
    for (int32_t i = 0; i < S; ++i)
      for (int32_t j = 0; j < cfg.ffn_dim; ++j) glay.ffn_b1(0, j) += dact(i, j);
    add_inplace(dabar, matmul_nt(dact, lay.ffn_w1));

    // ln1(x_in + attn_out)
    Matrix dres1 =
        detail::layer_norm_backward(dabar, lay.ln1_gain, lc.ln1, glay.ln1_gain, glay.ln1_bias);
    Matrix dx_in = dres1;  // residual branch
    Matrix dattn = dres1;
    add_inplace(glay.w_o, matmul_tn(lc.concat, dattn));
    Matrix dconcat = matmul_nt(dattn, lay.w_o);

    Matrix dq_full(S, d), dk_full(S, d), dv_full(S, d);
    for (int32_t h = 0; h < cfg.heads; ++h) {
      const auto& hc = lc.heads[static_cast<size_t>(h)];
      Matrix dctx = detail::cols_slice(dconcat, h * dk, (h + 1) * dk);
      Matrix dp = matmul_nt(dctx, hc.v);
      Matrix dv = matmul_tn(hc.p, dctx);
      // softmax rows
      Matrix dscores(S, S);
      for (int32_t i = 0; i < S; ++i) {
        double dot = 0.0;
        for (int32_t j = 0; j < S; ++j) dot += dp(i, j) * hc.p(i, j);
        for (int32_t j = 0; j < S; ++j) dscores(i, j) = hc.p(i, j) * (dp(i, j) - dot);
      }
      for (auto& v : dscores.a) v *= scale;
      Matrix dq = matmul(dscores, hc.k);
      Matrix dkm = matmul_tn(dscores, hc.q);
      detail::cols_accumulate(dq_full, dq, h * dk);
      detail::cols_accumulate(dk_full, dkm, h * dk);
      detail::cols_accumulate(dv_full, dv, h * dk);
    }
    add_inplace(glay.w_q, matmul_tn(lc.x_in, dq_full));
    add_inplace(glay.w_k, matmul_tn(lc.x_in, dk_full));
    add_inplace(glay.w_v, matmul_tn(lc.x_in, dv_full));
    add_inplace(dx_in, matmul_nt(dq_full, lay.w_q));
    add_inplace(dx_in, matmul_nt(dk_full, lay.w_k));
    add_inplace(dx_in, matmul_nt(dv_full, lay.w_v));
    dx = std::move(dx_in);
  }

  for (int32_t s = 0; s < S; ++s) {
    int32_t id = ids[static_cast<size_t>(s)];
    for (int32_t j = 0; j < d; ++j) grads.tok_embed(id, j) += dx(s, j);
    if (cfg.positional == Positional::learned)
      for (int32_t j = 0; j < d; ++j) grads.pos_embed(s, j) += dx(s, j);
  }
  return nll;
}

inline std::pair<double, ModelParams> loss_and_grad(const ModelParams& params,
                                                    const std::vector<int32_t>& ids,
                                                    const std::vector<int32_t>& target) {
  ModelParams grads = zero_params(params.config);
  double nll = loss_and_grad(params, ids, target, grads);
  return {nll, std::move(grads)};
}

inline void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::IoError, "cannot write checkpoint: " + path);
  const ModelConfig& c = params.config;
  out << "NAUSCKPT 1\n";
  out << "layers=" << c.layers << "\n";
  out << "heads=" << c.heads << "\n";
  out << "model_dim=" << c.model_dim << "\n";
  out << "ffn_dim=" << c.ffn_dim << "\n";
  out << "vocab_size=" << c.vocab_size << "\n";
  out << "max_len=" << c.max_len << "\n";
  out << "positional=" << positional_name(c.positional) << "\n";
  out << "end\n";
  params.visit([&](const std::string&, const Matrix& m) {
    for (double v : m.a) binio::put_f32(out, static_cast<float>(v));
  });
  if (!out) raise(ErrorKind::IoError, "short write to checkpoint: " + path);
}

inline ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::IoError, "cannot open checkpoint: " + path);
  binio::expect_magic(in, "NAUSCKPT 1", path);
  ModelConfig c;
  std::string line;
  bool saw_end = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      saw_end = true;
      break;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) raise(ErrorKind::CorruptFile, "bad config line in " + path);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (key == "layers") c.layers = std::atoi(val.c_str());
    else if (key == "heads") c.heads = std::atoi(val.c_str());
    else if (key == "model_dim") c.model_dim = std::atoi(val.c_str());
    else if (key == "ffn_dim") c.ffn_dim = std::atoi(val.c_str());
    else if (key == "vocab_size") c.vocab_size = std::atoi(val.c_str());
    else if (key == "max_len") c.max_len = std::atoi(val.c_str());
    else if (key == "positional") c.positional = positional_from_name(val);
    else raise(ErrorKind::CorruptFile, "unknown config key '" + key + "' in " + path);
  }
  if (!saw_end) raise(ErrorKind::CorruptFile, "missing config terminator in " + path);
  c.validate();
  ModelParams p = zero_params(c);
  p.visit([&](const std::string& name, Matrix& m) {
    for (auto& v : m.a) v = static_cast<double>(binio::get_f32(in, name.c_str()));
  });
  char extra;
  if (in.read(&extra, 1)) raise(ErrorKind::CorruptFile, "trailing bytes in " + path);
  return p;
}

}  // namespace naus
