#pragma once

// Tokenized corpus handling: the column file format, {B,I,O} label sequences,
// span <-> label conversion, and boundary-entropy statistics over word
// neighbourhoods. Everything downstream (features, taggers, word space) is
// built on the types in this header.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hypotax/error.hpp"
#include "hypotax/util.hpp"

namespace hypotax {

// Sentinels used both as out-of-range feature values and as the pseudo
// neighbour of sentence-initial/final tokens in the entropy counts.
inline constexpr const char* kBos = "_BOS_";
inline constexpr const char* kEos = "_EOS_";

enum class Label : std::uint8_t { B = 0, I = 1, O = 2 };

inline constexpr std::array<Label, 3> kLabels{Label::B, Label::I, Label::O};
inline constexpr std::size_t kLabelCount = 3;

inline char label_char(Label l) {
  switch (l) {
    case Label::B: return 'B';
    case Label::I: return 'I';
    default: return 'O';
  }
}

inline bool parse_label(std::string_view s, Label& out) {
  if (s.size() != 1) return false;
  switch (s[0]) {
    case 'B': out = Label::B; return true;
    case 'I': out = Label::I; return true;
    case 'O': out = Label::O; return true;
    default: return false;
  }
}

struct Token {
  std::string surface;
  std::string pos;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

using LabelSequence = std::vector<Label>;

// Checks the BIO grammar: no leading I, no I directly after O.
inline bool labels_valid(const LabelSequence& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != Label::I) continue;
    if (i == 0 || labels[i - 1] == Label::O) return false;
  }
  return true;
}

// Half-open bounds are deliberately not used: [start, end] are both inclusive
// token indices, matching how spans are talked about everywhere else here.
struct TermSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;

  bool operator==(const TermSpan&) const = default;
};

inline TermSpan make_span(const Sentence& s, std::size_t start, std::size_t end) {
  if (start > end || end >= s.size())
    throw ContractError("span [" + std::to_string(start) + "," + std::to_string(end) +
                        "] out of bounds for sentence of length " +
                        std::to_string(s.size()));
  TermSpan span{start, end, {}};
  for (std::size_t i = start; i <= end; ++i) span.text += s.tokens[i].surface;
  return span;
}

struct Corpus {
  std::vector<Sentence> sentences;
  // One label per token when present; empty when the corpus is unlabeled.
  std::vector<LabelSequence> gold;

  bool has_gold() const { return !gold.empty(); }
};

// ---------------------------------------------------------------------------
// BIO conversion

inline LabelSequence bio_encode(const Sentence& sentence,
                                std::vector<TermSpan> spans) {
  for (const TermSpan& sp : spans) {
    if (sp.start > sp.end || sp.end >= sentence.size())
      throw ContractError("span [" + std::to_string(sp.start) + "," +
                          std::to_string(sp.end) + "] out of bounds");
  }
  std::sort(spans.begin(), spans.end(),
            [](const TermSpan& a, const TermSpan& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].start <= spans[i - 1].end)
      throw ContractError("overlapping spans at token " +
                          std::to_string(spans[i].start));
  }
  LabelSequence labels(sentence.size(), Label::O);
  for (const TermSpan& sp : spans) {
    labels[sp.start] = Label::B;
    for (std::size_t i = sp.start + 1; i <= sp.end; ++i) labels[i] = Label::I;
  }
  return labels;
}

inline std::vector<TermSpan> bio_decode(const Sentence& sentence,
                                        const LabelSequence& labels) {
  if (labels.size() != sentence.size())
    throw ContractError("label sequence length " + std::to_string(labels.size()) +
                        " does not match sentence length " +
                        std::to_string(sentence.size()));
  if (!labels_valid(labels))
    throw ContractError("invalid BIO sequence (leading I or I after O)");
  std::vector<TermSpan> spans;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (labels[i] != Label::B) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < labels.size() && labels[j + 1] == Label::I) ++j;
    spans.push_back(make_span(sentence, i, j));
    i = j + 1;
  }
  return spans;
}

// ---------------------------------------------------------------------------
// Column file format: surface<TAB>pos[<TAB>label], blank line between
// sentences, '#' lines are comments, UTF-8 throughout.

namespace detail {

inline void finish_sentence(Corpus& corpus, Sentence& sent, LabelSequence& labels,
                            bool has_labels, const std::string& file,
                            std::size_t line_no) {
  if (sent.tokens.empty()) return;
  if (has_labels && !labels_valid(labels))
    throw ParseError(file, line_no,
                     "label consistency: leading I or I after O in sentence " +
                         std::to_string(corpus.sentences.size()));
  corpus.sentences.push_back(std::move(sent));
  if (has_labels) corpus.gold.push_back(std::move(labels));
  sent = Sentence{};
  labels = LabelSequence{};
}

}  // namespace detail

inline Corpus parse_corpus(std::istream& in, bool has_labels,
                           const std::string& file = "<stream>") {
  Corpus corpus;
  Sentence sent;
  LabelSequence labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') continue;
    if (line.empty()) {
      detail::finish_sentence(corpus, sent, labels, has_labels, file, line_no);
      continue;
    }
    auto cols = split(line, '\t');
    std::size_t expect = has_labels ? 3 : 2;
    if (cols.size() != expect)
      throw ParseError(file, line_no,
                       "expected " + std::to_string(expect) + " columns, got " +
                           std::to_string(cols.size()));
    if (cols[0].empty() || cols[1].empty())
      throw ParseError(file, line_no, "empty surface or POS column");
    sent.tokens.push_back(Token{std::string(cols[0]), std::string(cols[1])});
    if (has_labels) {
      Label l;
      if (!parse_label(cols[2], l))
        throw ParseError(file, line_no,
                         "invalid label '" + std::string(cols[2]) + "'");
      labels.push_back(l);
    }
  }
  detail::finish_sentence(corpus, sent, labels, has_labels, file, line_no + 1);
  return corpus;
}

inline Corpus load_corpus(const std::filesystem::path& path, bool has_labels) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_corpus(in, has_labels, path.string());
}

inline std::string corpus_to_string(const Corpus& corpus) {
  std::string out;
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const Sentence& sent = corpus.sentences[si];
    for (std::size_t i = 0; i < sent.size(); ++i) {
      out += sent.tokens[i].surface;
      out += '\t';
      out += sent.tokens[i].pos;
      if (corpus.has_gold()) {
        out += '\t';
        out += label_char(corpus.gold[si][i]);
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << corpus_to_string(corpus);
}

// ---------------------------------------------------------------------------
// Boundary entropy. For every word we collect the distribution of its
// immediate left and right neighbours across the corpus (with _BOS_/_EOS_
// standing in at sentence edges) and take the Shannon entropy in nats.
// Feature extraction wants a coarse symbol, so values are discretized into
// five quintile buckets "E0".."E4" of the corpus-wide distribution.

enum class Side { Left, Right };

struct EntropyTable {
  struct Entry {
    double left = 0.0;
    double right = 0.0;
  };

  // std::map keeps iteration (and the TSV serialization) sorted by surface.
  std::map<std::string, Entry> words;

  const Entry* find(const std::string& surface) const {
    auto it = words.find(surface);
    return it == words.end() ? nullptr : &it->second;
  }

  // Quintile edges, 4 per side; recomputed whenever the values change.
  std::array<std::array<double, 4>, 2> bounds{};
  bool empty() const { return words.empty(); }

  void recompute_bounds() {
    for (Side side : {Side::Left, Side::Right}) {
      std::vector<double> vals;
      vals.reserve(words.size());
      for (const auto& [w, e] : words)
        vals.push_back(side == Side::Left ? e.left : e.right);
      std::sort(vals.begin(), vals.end());
      auto& b = bounds[side == Side::Left ? 0 : 1];
      std::size_t n = vals.size();
      for (std::size_t j = 1; j <= 4; ++j) {
        // Nearest-rank quantile: 1-based rank ceil(j*n/5).
        std::size_t rank = (j * n + 4) / 5;
        b[j - 1] = n == 0 ? 0.0 : vals[rank - 1];
      }
    }
  }
};

inline double entropy_of_counts(const std::map<std::string, std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (const auto& [w, c] : counts) total += c;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto& [w, c] : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

inline EntropyTable compute_boundary_entropies(const Corpus& corpus) {
  if (corpus.sentences.empty())
    throw ContractError("cannot compute entropies of an empty corpus");
  std::map<std::string, std::map<std::string, std::uint64_t>> left, right;
  for (const Sentence& sent : corpus.sentences) {
    for (std::size_t i = 0; i < sent.size(); ++i) {
      const std::string& w = sent.tokens[i].surface;
      const std::string& ln = i == 0 ? std::string(kBos) : sent.tokens[i - 1].surface;
      const std::string& rn =
          i + 1 == sent.size() ? std::string(kEos) : sent.tokens[i + 1].surface;
      ++left[w][ln];
      ++right[w][rn];
    }
  }
  EntropyTable table;
  for (const auto& [w, counts] : left) {
    EntropyTable::Entry e;
    e.left = entropy_of_counts(counts);
    e.right = entropy_of_counts(right.at(w));
    table.words.emplace(w, e);
  }
  table.recompute_bounds();
  return table;
}

// Bucket label for an entropy value against one side's corpus distribution.
// A value equal to a bucket edge falls in the lower bucket; anything at or
// below the first edge is "E0", anything above the last is "E4".
inline std::string bucket_entropy(double value, const EntropyTable& table,
                                  Side side) {
  if (table.empty()) return "E0";
  const auto& b = table.bounds[side == Side::Left ? 0 : 1];
  int bucket = 0;
  for (double edge : b)
    if (value > edge) ++bucket;
  return "E" + std::to_string(bucket);
}

inline std::string entropy_table_to_string(const EntropyTable& table,
                                           bool shortest = false) {
  std::string out;
  for (const auto& [w, e] : table.words) {
    out += w;
    out += '\t';
    out += shortest ? format_double(e.left) : format_fixed(e.left, 6);
    out += '\t';
    out += shortest ? format_double(e.right) : format_fixed(e.right, 6);
    out += '\n';
  }
  return out;
}

inline void save_entropy_table(const EntropyTable& table,
                               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << entropy_table_to_string(table);
}

inline EntropyTable parse_entropy_line(EntropyTable& table, std::string_view line,
                                       const std::string& file, std::size_t line_no) {
  auto cols = split(line, '\t');
  if (cols.size() != 3)
    throw ParseError(file, line_no, "expected 3 columns in entropy table");
  EntropyTable::Entry e;
  e.left = parse_double(cols[1], "left entropy");
  e.right = parse_double(cols[2], "right entropy");
  if (cols[0].empty()) throw ParseError(file, line_no, "empty surface");
  table.words[std::string(cols[0])] = e;
  return table;
}

inline EntropyTable load_entropy_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  EntropyTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    parse_entropy_line(table, line, path.string(), line_no);
  }
  table.recompute_bounds();
  return table;
}

}  // namespace hypotax
