#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "naus/common.hpp"

namespace naus {

inline constexpr const char* kBlankToken = "<eps>";
inline constexpr const char* kUnkToken = "<unk>";

namespace detail {
// Word characters: ASCII alphanumerics plus any non-ASCII byte, so that
// UTF-8 multibyte sequences stay glued together.
inline bool is_word_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}
}  // namespace detail

// Lowercases, splits on whitespace, and detaches punctuation into separate
// single-character tokens. An apostrophe stays inside a token only when
// flanked by word characters on both sides ("don't" -> don't).
inline std::vector<std::string> tokenize(const std::string& raw) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (size_t i = 0; i < raw.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(raw[i]);
    if (std::isspace(c)) {
      flush();
    } else if (detail::is_word_byte(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'' && !cur.empty() && i + 1 < raw.size() &&
               detail::is_word_byte(static_cast<unsigned char>(raw[i + 1]))) {
      cur.push_back('\'');
    } else {
      flush();
      out.push_back(std::string(1, static_cast<char>(c)));
    }
  }
  flush();
  if (out.empty()) raise(ErrorKind::EmptyInput, "input is empty after tokenization");
  return out;
}

// Token/id bijection with two reserved entries: <unk> second-to-last and
// the blank <eps> always last, so word ids stay stable as the lattice
// layout (blank = final column) is fixed.
struct Vocab {
  std::vector<std::string> tokens;
  std::vector<uint64_t> counts;
  std::unordered_map<std::string, int32_t> index;
  int32_t blank_id = -1;
  int32_t unk_id = -1;

  int32_t size() const { return static_cast<int32_t>(tokens.size()); }
  // Token count excluding the blank; equals the model's V.
  int32_t nonblank_size() const { return size() - 1; }

  void rebuild_index() {
    index.clear();
    for (int32_t i = 0; i < size(); ++i) index.emplace(tokens[i], i);
    auto b = index.find(kBlankToken);
    auto u = index.find(kUnkToken);
    if (b == index.end() || u == index.end())
      raise(ErrorKind::CorruptFile, "vocab is missing a reserved token");
    blank_id = b->second;
    unk_id = u->second;
  }

  int32_t encode_token(const std::string& tok) const {
    if (tok == kBlankToken) return unk_id;  // the blank never enters text
    auto it = index.find(tok);
    return it == index.end() ? unk_id : it->second;
  }

  std::vector<int32_t> encode(const std::vector<std::string>& toks) const {
    std::vector<int32_t> ids;
    ids.reserve(toks.size());
    for (const auto& t : toks) ids.push_back(encode_token(t));
    return ids;
  }

  const std::string& decode_id(int32_t id) const {
    if (id < 0 || id >= size())
      raise(ErrorKind::InvalidId, "token id " + std::to_string(id) + " out of range");
    return tokens[id];
  }

  std::vector<std::string> decode(const std::vector<int32_t>& ids) const {
    std::vector<std::string> toks;
    toks.reserve(ids.size());
    for (int32_t id : ids) toks.push_back(decode_id(id));
    return toks;
  }
};

struct Sentence {
  std::vector<int32_t> ids;
  std::string raw;
};

// Streams non-blank lines from a one-sentence-per-line UTF-8 file.
// CRLF endings are normalized. Single consumer.
class CorpusReader {
 public:
  explicit CorpusReader(const std::string& path) : in_(path), path_(path) {
    if (!in_) raise(ErrorKind::IoError, "cannot open corpus file: " + path);
  }

  std::optional<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      return line;
    }
    return std::nullopt;
  }

  const std::string& path() const { return path_; }

 private:
  std::ifstream in_;
  std::string path_;
};

inline std::vector<std::string> load_corpus_lines(const std::string& path) {
  CorpusReader reader(path);
  std::vector<std::string> lines;
  while (auto line = reader.next()) lines.push_back(*line);
  return lines;
}

// Every line, blanks included; for files where line alignment matters
// (predictions may contain legitimately empty summaries).
inline std::vector<std::string> read_lines_strict(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::IoError, "cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

// Vocabulary over all tokens with frequency >= min_count, ordered by
// descending count with lexicographic ties, then <unk>, then <eps>.
inline Vocab build_vocab(const std::vector<std::string>& corpus_lines, uint64_t min_count = 1) {
  if (min_count < 1) raise(ErrorKind::ConfigError, "min_count must be >= 1");
  std::unordered_map<std::string, uint64_t> freq;
  bool any = false;
  for (const auto& line : corpus_lines) {
    for (const auto& tok : tokenize(line)) {
      ++freq[tok];
      any = true;
    }
  }
  if (!any) raise(ErrorKind::EmptyCorpus, "corpus has no tokens");

  std::vector<std::pair<std::string, uint64_t>> kept;
  for (const auto& [tok, c] : freq)
    if (c >= min_count) kept.emplace_back(tok, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocab v;
  for (auto& [tok, c] : kept) {
    v.tokens.push_back(tok);
    v.counts.push_back(c);
  }
  v.tokens.push_back(kUnkToken);
  v.counts.push_back(0);
  v.tokens.push_back(kBlankToken);
  v.counts.push_back(0);
  v.rebuild_index();
  return v;
}

inline void save_vocab(const Vocab& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::IoError, "cannot write vocab file: " + path);
  out << "NAUSVOCAB 1\n";
  for (int32_t i = 0; i < v.size(); ++i)
    out << v.tokens[i] << '\t' << v.counts[i] << '\n';
  if (!out) raise(ErrorKind::IoError, "short write to vocab file: " + path);
}

inline Vocab load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::IoError, "cannot open vocab file: " + path);
  std::string header;
  if (!std::getline(in, header) || header != "NAUSVOCAB 1")
    raise(ErrorKind::VersionMismatch, "bad vocab header in " + path);
  Vocab v;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      raise(ErrorKind::CorruptFile, "vocab line without tab in " + path);
    v.tokens.push_back(line.substr(0, tab));
    v.counts.push_back(std::strtoull(line.c_str() + tab + 1, nullptr, 10));
  }
  if (v.tokens.empty()) raise(ErrorKind::CorruptFile, "empty vocab file: " + path);
  v.rebuild_index();
  return v;
}

inline std::string join_tokens(const std::vector<std::string>& toks) {
  std::string s;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) s.push_back(' ');
    s += toks[i];
  }
  return s;
}

}  // namespace naus
