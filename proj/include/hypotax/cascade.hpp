#pragma once

// Two-layer cascade: a low CRF tags simple terms on the raw token stream,
// every decoded B(I)* run is merged into a single composite token (surfaces
// concatenated, POS replaced by a synthetic tag), and a high CRF tags complex
// terms over the merged stream. Training reads a 4-column file where the
// second label column is aligned to the first row of each gold layer-1 span.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hypotax/corpus.hpp"
#include "hypotax/crf.hpp"
#include "hypotax/error.hpp"

namespace hypotax {

inline constexpr const char* kMergedPos = "TERM";

struct MergedSentence {
  Sentence sentence;
  // Original token range [start, end] behind each merged token, and whether
  // that token came from a recognized term span.
  struct Provenance {
    std::size_t start;
    std::size_t end;
    bool is_term;
  };
  std::vector<Provenance> provenance;
};

inline MergedSentence merge_spans(const Sentence& sentence,
                                  const LabelSequence& labels,
                                  const std::string& merged_pos = kMergedPos) {
  if (labels.size() != sentence.size())
    throw ContractError("label sequence length does not match sentence");
  if (!labels_valid(labels))
    throw ContractError("invalid BIO sequence (leading I or I after O)");
  MergedSentence out;
  std::size_t i = 0;
  while (i < sentence.size()) {
    if (labels[i] == Label::O) {
      out.sentence.tokens.push_back(sentence.tokens[i]);
      out.provenance.push_back({i, i, false});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < sentence.size() && labels[j + 1] == Label::I) ++j;
    Token merged{make_span(sentence, i, j).text, merged_pos};
    out.sentence.tokens.push_back(std::move(merged));
    out.provenance.push_back({i, j, true});
    i = j + 1;
  }
  return out;
}

struct CascadeModel {
  CrfModel low;
  CrfModel high;
  std::string merged_pos = kMergedPos;
};

struct TagResult {
  LabelSequence low_labels;
  MergedSentence merged;
  LabelSequence high_labels;
};

inline TagResult tag_cascade(const CascadeModel& model, const Sentence& sentence) {
  if (sentence.size() == 0) throw ContractError("empty sentence");
  TagResult r;
  r.low_labels = viterbi_decode(model.low, sentence, model.low.features_for(sentence));
  r.merged = merge_spans(sentence, r.low_labels, model.merged_pos);
  r.high_labels = viterbi_decode(model.high, r.merged.sentence,
                                 model.high.features_for(r.merged.sentence));
  return r;
}

// ---------------------------------------------------------------------------
// 4-column training format: surface<TAB>pos<TAB>label1<TAB>label2. The layer-2
// label sits on the first row of each gold layer-1 span (and on every O row,
// which is its own merged token); continuation rows carry "_".

struct CascadeTrainData {
  Corpus corpus;  // layer-1 sentences and gold
  std::vector<Sentence> merged_sentences;
  std::vector<LabelSequence> merged_gold;

  Corpus merged_corpus() const {
    Corpus c;
    c.sentences = merged_sentences;
    c.gold = merged_gold;
    return c;
  }
};

inline CascadeTrainData parse_cascade_corpus(std::istream& in,
                                             const std::string& file = "<stream>",
                                             const std::string& merged_pos = kMergedPos) {
  struct Row {
    Token token;
    Label label1;
    std::string label2;  // "B"/"I"/"O" or "_"
    std::size_t line_no;
  };
  CascadeTrainData data;
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&]() {
    if (rows.empty()) return;
    Sentence sent;
    LabelSequence gold1;
    for (const Row& r : rows) {
      sent.tokens.push_back(r.token);
      gold1.push_back(r.label1);
    }
    if (!labels_valid(gold1))
      throw ParseError(file, rows.back().line_no,
                       "label consistency: leading I or I after O in sentence " +
                           std::to_string(data.corpus.sentences.size()));
    MergedSentence merged = merge_spans(sent, gold1, merged_pos);
    LabelSequence gold2;
    for (const auto& prov : merged.provenance) {
      const Row& first = rows[prov.start];
      Label l;
      if (first.label2 == "_" || !parse_label(first.label2, l))
        throw ParseError(file, first.line_no,
                         "expected a layer-2 label on the first row of a span, got '" +
                             first.label2 + "'");
      gold2.push_back(l);
      for (std::size_t i = prov.start + 1; i <= prov.end; ++i)
        if (rows[i].label2 != "_")
          throw ParseError(file, rows[i].line_no,
                           "continuation rows must carry '_' in the layer-2 column");
    }
    if (!labels_valid(gold2))
      throw ParseError(file, rows.back().line_no,
                       "label consistency: invalid layer-2 sequence in sentence " +
                           std::to_string(data.corpus.sentences.size()));
    data.corpus.sentences.push_back(std::move(sent));
    data.corpus.gold.push_back(std::move(gold1));
    data.merged_sentences.push_back(std::move(merged.sentence));
    data.merged_gold.push_back(std::move(gold2));
    rows.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') continue;
    if (line.empty()) {
      flush();
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 4)
      throw ParseError(file, line_no,
                       "expected 4 columns, got " + std::to_string(cols.size()));
    if (cols[0].empty() || cols[1].empty())
      throw ParseError(file, line_no, "empty surface or POS column");
    Label l1;
    if (!parse_label(cols[2], l1))
      throw ParseError(file, line_no, "invalid label '" + std::string(cols[2]) + "'");
    rows.push_back(
        Row{Token{std::string(cols[0]), std::string(cols[1])}, l1,
            std::string(cols[3]), line_no});
  }
  flush();
  return data;
}

inline CascadeTrainData load_cascade_corpus(const std::filesystem::path& path,
                                            const std::string& merged_pos = kMergedPos) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_cascade_corpus(in, path.string(), merged_pos);
}

// Trains the low layer on the raw gold corpus and the high layer on the
// gold-merged corpus, each with boundary entropies recomputed on its own
// token stream.
inline CascadeModel train_cascade(const CascadeTrainData& data,
                                  const TrainConfig& low_config,
                                  const TrainConfig& high_config,
                                  const TemplateSet& templates = default_template_set(),
                                  const std::string& merged_pos = kMergedPos) {
  EntropyTable low_entropies = compute_boundary_entropies(data.corpus);
  CrfModel low = train(data.corpus, templates, low_entropies, low_config);
  Corpus merged = data.merged_corpus();
  EntropyTable high_entropies = compute_boundary_entropies(merged);
  CrfModel high = train(merged, templates, high_entropies, high_config);
  return CascadeModel{std::move(low), std::move(high), merged_pos};
}

// ---------------------------------------------------------------------------
// Term inventory

struct TermInventory {
  // term -> occurrence count; std::map keeps serialization sorted.
  std::map<std::string, std::uint64_t> simple;
  std::map<std::string, std::uint64_t> complex;

  // Corpus frequency per concept, summed across layers for strings that were
  // extracted at both.
  std::map<std::string, std::uint64_t> frequencies() const {
    std::map<std::string, std::uint64_t> f = simple;
    for (const auto& [term, n] : complex) f[term] += n;
    return f;
  }

  std::vector<std::string> concepts() const {
    std::vector<std::string> out;
    for (const auto& [term, n] : frequencies()) out.push_back(term);
    return out;
  }
};

// A high-layer span yields a complex term only if it covers at least two
// merged tokens or contains at least one merged term token; a single ordinary
// token re-tagged at the high layer would just duplicate the raw word.
inline bool complex_span_qualifies(const MergedSentence& merged, std::size_t start,
                                   std::size_t end) {
  if (end > start) return true;
  for (std::size_t i = start; i <= end; ++i)
    if (merged.provenance[i].is_term) return true;
  return false;
}

inline TermInventory extract_terms(const CascadeModel& model, const Corpus& corpus) {
  TermInventory inv;
  for (const Sentence& sent : corpus.sentences) {
    if (sent.size() == 0) continue;
    TagResult r = tag_cascade(model, sent);
    for (const TermSpan& sp : bio_decode(sent, r.low_labels))
      ++inv.simple[sp.text];
    for (const TermSpan& sp : bio_decode(r.merged.sentence, r.high_labels))
      if (complex_span_qualifies(r.merged, sp.start, sp.end))
        ++inv.complex[sp.text];
  }
  return inv;
}

inline std::string inventory_to_string(const TermInventory& inv) {
  std::string out;
  for (const auto& [term, n] : inv.simple)
    out += term + "\tsimple\t" + std::to_string(n) + "\n";
  for (const auto& [term, n] : inv.complex)
    out += term + "\tcomplex\t" + std::to_string(n) + "\n";
  return out;
}

inline void save_inventory(const TermInventory& inv,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << inventory_to_string(inv);
}

inline TermInventory load_inventory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  TermInventory inv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3)
      throw ParseError(path.string(), line_no, "expected 3 columns in inventory");
    auto count = parse_int(cols[2], "frequency");
    if (count < 0) throw ParseError(path.string(), line_no, "negative frequency");
    if (cols[1] == "simple")
      inv.simple[std::string(cols[0])] = static_cast<std::uint64_t>(count);
    else if (cols[1] == "complex")
      inv.complex[std::string(cols[0])] = static_cast<std::uint64_t>(count);
    else
      throw ParseError(path.string(), line_no,
                       "unknown layer '" + std::string(cols[1]) + "'");
  }
  return inv;
}

}  // namespace hypotax
