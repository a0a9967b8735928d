#pragma once

// Word-space concept vectors. Every corpus occurrence of a concept (matched
// as a run of consecutive tokens whose concatenated surfaces equal the
// concept string) contributes the tokens in a window of `left` positions
// before and `right` after, clipped at sentence boundaries and excluding the
// occurrence itself. A concept keeps its top-`dimension` context words by
// frequency; similarity is the cosine over the aligned union vocabulary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hypotax/cascade.hpp"
#include "hypotax/corpus.hpp"
#include "hypotax/error.hpp"
#include "hypotax/util.hpp"

namespace hypotax {

struct WindowConfig {
  std::size_t left = 8;
  std::size_t right = 8;
  std::size_t dimension = 12;

  void validate() const {
    if (left + right < 1) throw ConfigError("window must cover at least one position");
    if (dimension < 1) throw ConfigError("dimension must be >= 1");
  }

  bool operator==(const WindowConfig&) const = default;
};

struct ConceptVector {
  std::string term;
  // Context entries sorted by frequency descending, then word ascending;
  // at most `dimension` of them.
  std::vector<std::pair<std::string, std::uint64_t>> entries;

  bool operator==(const ConceptVector&) const = default;
};

inline ConceptVector build_vector(const Corpus& corpus, const std::string& term,
                                  const WindowConfig& window) {
  window.validate();
  if (term.empty()) throw ContractError("empty concept string");
  std::map<std::string, std::uint64_t> counts;
  for (const Sentence& sent : corpus.sentences) {
    std::size_t m = sent.size();
    for (std::size_t i = 0; i < m; ++i) {
      // Greedily extend while the concatenation still fits the term.
      std::size_t len = 0;
      std::size_t j = i;
      for (; j < m; ++j) {
        len += sent.tokens[j].surface.size();
        if (len >= term.size()) break;
      }
      if (j == m || len != term.size()) continue;
      std::string concat;
      for (std::size_t k = i; k <= j; ++k) concat += sent.tokens[k].surface;
      if (concat != term) continue;
      std::size_t lo = i >= window.left ? i - window.left : 0;
      for (std::size_t k = lo; k < i; ++k) ++counts[sent.tokens[k].surface];
      std::size_t hi = std::min(m, j + 1 + window.right);
      for (std::size_t k = j + 1; k < hi; ++k) ++counts[sent.tokens[k].surface];
    }
  }
  ConceptVector v;
  v.term = term;
  v.entries.assign(counts.begin(), counts.end());
  std::sort(v.entries.begin(), v.entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (v.entries.size() > window.dimension) v.entries.resize(window.dimension);
  return v;
}

// One vector per concept in the inventory, concepts ordered ascending.
inline std::vector<ConceptVector> build_vectors(const Corpus& corpus,
                                                const TermInventory& inventory,
                                                const WindowConfig& window) {
  std::vector<ConceptVector> out;
  for (const std::string& c : inventory.concepts())
    out.push_back(build_vector(corpus, c, window));
  return out;
}

// Dense views of two sparse vectors over their union vocabulary (ascending),
// missing words filled with zero.
struct AlignedPair {
  std::vector<std::string> vocab;
  std::vector<double> a;
  std::vector<double> b;
};

inline AlignedPair align_pair(const ConceptVector& va, const ConceptVector& vb) {
  std::map<std::string, std::pair<double, double>> merged;
  for (const auto& [w, f] : va.entries) merged[w].first = static_cast<double>(f);
  for (const auto& [w, f] : vb.entries) merged[w].second = static_cast<double>(f);
  AlignedPair out;
  for (const auto& [w, fs] : merged) {
    out.vocab.push_back(w);
    out.a.push_back(fs.first);
    out.b.push_back(fs.second);
  }
  return out;
}

inline double cosine(const ConceptVector& va, const ConceptVector& vb) {
  AlignedPair p = align_pair(va, vb);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < p.vocab.size(); ++i) {
    dot += p.a[i] * p.b[i];
    na += p.a[i] * p.a[i];
    nb += p.b[i] * p.b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

// Upper-triangular pairwise cosine matrix over a fixed concept ordering.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::vector<std::string> concepts, std::vector<double> upper)
      : concepts_(std::move(concepts)), upper_(std::move(upper)) {
    std::size_t n = concepts_.size();
    if (upper_.size() != n * (n - 1) / 2)
      throw ContractError("similarity matrix size mismatch");
  }

  std::size_t size() const { return concepts_.size(); }
  const std::vector<std::string>& concepts() const { return concepts_; }

  double at(std::size_t i, std::size_t j) const {
    if (i == j) throw ContractError("no diagonal entries in similarity matrix");
    if (i > j) std::swap(i, j);
    return upper_[index(i, j)];
  }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    std::size_t n = concepts_.size();
    return i * (2 * n - i - 1) / 2 + (j - i - 1);
  }

  std::vector<std::string> concepts_;
  std::vector<double> upper_;
};

inline SimilarityMatrix build_matrix(const std::vector<ConceptVector>& vectors) {
  if (vectors.size() < 2)
    throw ContractError("similarity matrix needs at least 2 vectors");
  std::vector<std::string> concepts;
  for (const auto& v : vectors) concepts.push_back(v.term);
  {
    auto sorted = concepts;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ContractError("duplicate concepts in vector list");
  }
  std::vector<double> upper;
  upper.reserve(vectors.size() * (vectors.size() - 1) / 2);
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i + 1; j < vectors.size(); ++j)
      upper.push_back(cosine(vectors[i], vectors[j]));
  return SimilarityMatrix(std::move(concepts), std::move(upper));
}

// ---------------------------------------------------------------------------
// Persistence

inline std::string vectors_to_string(const std::vector<ConceptVector>& vectors) {
  std::string out;
  for (const auto& v : vectors) {
    out += v.term;
    for (const auto& [w, f] : v.entries) {
      out += '\t';
      out += w;
      out += ':';
      out += std::to_string(f);
    }
    out += '\n';
  }
  return out;
}

inline void save_vectors(const std::vector<ConceptVector>& vectors,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << vectors_to_string(vectors);
}

inline std::vector<ConceptVector> load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::vector<ConceptVector> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    ConceptVector v;
    v.term = std::string(cols[0]);
    if (v.term.empty()) throw ParseError(path.string(), line_no, "empty concept");
    for (std::size_t i = 1; i < cols.size(); ++i) {
      // Split on the last ':' so surfaces containing ':' stay intact.
      auto sep = cols[i].rfind(':');
      if (sep == std::string_view::npos || sep == 0)
        throw ParseError(path.string(), line_no, "malformed entry '" +
                                                     std::string(cols[i]) + "'");
      auto f = parse_int(cols[i].substr(sep + 1), "context frequency");
      if (f < 0) throw ParseError(path.string(), line_no, "negative frequency");
      v.entries.emplace_back(std::string(cols[i].substr(0, sep)),
                             static_cast<std::uint64_t>(f));
    }
    out.push_back(std::move(v));
  }
  return out;
}

inline std::string matrix_to_string(const SimilarityMatrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) out += '\t';
    out += m.concepts()[i];
  }
  out += '\n';
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j)
      out += std::to_string(i) + "\t" + std::to_string(j) + "\t" +
             format_fixed(m.at(i, j), 6) + "\n";
  return out;
}

inline void save_matrix(const SimilarityMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << matrix_to_string(m);
}

}  // namespace hypotax
