#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "naus/common.hpp"

namespace naus {

// Cosine floor; keeps f_sim^gamma positive and finite.
inline constexpr double kCosineFloor = 1e-4;

// Word-vector table with deterministic hash-seeded unit vectors for
// out-of-vocabulary tokens.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim) : dim_(dim) {
    if (dim < 1) raise(ErrorKind::ConfigError, "embedding dim must be >= 1");
  }

  static EmbeddingTable load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::IoError, "cannot open vector file: " + path);
    EmbeddingTable table(1);
    table.dim_ = -1;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string tok;
      if (!(ls >> tok))
        raise(ErrorKind::ParseError, "vector file line " + std::to_string(lineno) + ": no token");
      std::vector<double> vec;
      double v;
      while (ls >> v) vec.push_back(v);
      if (!ls.eof())
        raise(ErrorKind::ParseError,
              "vector file line " + std::to_string(lineno) + ": malformed number");
      if (vec.empty())
        raise(ErrorKind::ParseError,
              "vector file line " + std::to_string(lineno) + ": no vector components");
      if (table.dim_ == -1) {
        table.dim_ = static_cast<int>(vec.size());
      } else if (static_cast<int>(vec.size()) != table.dim_) {
        raise(ErrorKind::InconsistentDimension,
              "vector file line " + std::to_string(lineno) + ": expected dim " +
                  std::to_string(table.dim_) + ", got " + std::to_string(vec.size()));
      }
      if (table.vectors_.count(tok))
        std::cerr << "warning: duplicate vector for token '" << tok << "' (line " << lineno
                  << "), keeping the last one\n";
      table.vectors_[tok] = std::move(vec);
    }
    if (table.dim_ == -1) raise(ErrorKind::EmptyInput, "vector file has no entries: " + path);
    return table;
  }

  int dim() const { return dim_; }
  size_t size() const { return vectors_.size(); }

  std::vector<double> vector_for(const std::string& token) const {
    auto it = vectors_.find(token);
    if (it != vectors_.end()) return it->second;
    return default_vector(token, dim_);
  }

  // Pure function of (token, dim): unit vector from a token-hash-seeded stream.
  static std::vector<double> default_vector(const std::string& token, int dim) {
    Rng rng(mix_seed(fnv1a64(token), 0x00bedull));
    std::vector<double> v(static_cast<size_t>(dim));
    double norm = 0.0;
    for (auto& x : v) {
      x = rng.gaussian();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      v.assign(static_cast<size_t>(dim), 0.0);
      v[0] = 1.0;
      return v;
    }
    for (auto& x : v) x /= norm;
    return v;
  }

  std::vector<double> sentence_embedding(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) raise(ErrorKind::EmptyInput, "cannot embed an empty sentence");
    std::vector<double> mean(static_cast<size_t>(dim_), 0.0);
    for (const auto& tok : tokens) {
      auto v = vector_for(tok);
      for (int i = 0; i < dim_; ++i) mean[static_cast<size_t>(i)] += v[static_cast<size_t>(i)];
    }
    for (auto& x : mean) x /= static_cast<double>(tokens.size());
    return mean;
  }

  // Cosine of the two mean-pooled sentence embeddings, clamped below at
  // kCosineFloor. A zero embedding on either side yields the floor.
  double similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) const {
    auto va = sentence_embedding(a);
    auto vb = sentence_embedding(b);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < dim_; ++i) {
      dot += va[static_cast<size_t>(i)] * vb[static_cast<size_t>(i)];
      na += va[static_cast<size_t>(i)] * va[static_cast<size_t>(i)];
      nb += vb[static_cast<size_t>(i)] * vb[static_cast<size_t>(i)];
    }
    if (na <= 0.0 || nb <= 0.0) return kCosineFloor;
    double cos = dot / (std::sqrt(na) * std::sqrt(nb));
    if (cos > 1.0) cos = 1.0;
    return cos < kCosineFloor ? kCosineFloor : cos;
  }

  void insert(const std::string& token, std::vector<double> vec) {
    if (static_cast<int>(vec.size()) != dim_)
      raise(ErrorKind::InconsistentDimension, "vector dim mismatch for token " + token);
    vectors_[token] = std::move(vec);
  }

 private:
  int dim_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

}  // namespace naus
