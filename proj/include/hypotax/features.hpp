#pragma once

// Feature templates and their instantiation. A template is a kind plus one or
// two relative offsets; instantiating it at a sentence position yields an
// observation string like "W[-1]=安装" or "WL[-1,0]=2|3". The dictionary maps
// the (label-conjoined) feature strings seen in training data to contiguous
// parameter indices and is frozen afterwards.

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hypotax/corpus.hpp"
#include "hypotax/error.hpp"
#include "hypotax/util.hpp"

namespace hypotax {

enum class TemplateKind { Word, POS, WordLen, Lien, Rien, Hybrid };

inline const char* template_kind_name(TemplateKind k) {
  switch (k) {
    case TemplateKind::Word: return "Word";
    case TemplateKind::POS: return "POS";
    case TemplateKind::WordLen: return "WordLen";
    case TemplateKind::Lien: return "Lien";
    case TemplateKind::Rien: return "Rien";
    default: return "Hybrid";
  }
}

inline bool template_kind_from_name(std::string_view s, TemplateKind& out) {
  if (s == "Word") out = TemplateKind::Word;
  else if (s == "POS") out = TemplateKind::POS;
  else if (s == "WordLen") out = TemplateKind::WordLen;
  else if (s == "Lien") out = TemplateKind::Lien;
  else if (s == "Rien") out = TemplateKind::Rien;
  else if (s == "Hybrid") out = TemplateKind::Hybrid;
  else return false;
  return true;
}

// Short tag used inside feature strings; Hybrid pairs word and POS so it
// renders as "WP".
inline const char* template_kind_tag(TemplateKind k) {
  switch (k) {
    case TemplateKind::Word: return "W";
    case TemplateKind::POS: return "P";
    case TemplateKind::WordLen: return "WL";
    case TemplateKind::Lien: return "L";
    case TemplateKind::Rien: return "R";
    default: return "WP";
  }
}

struct FeatureTemplate {
  TemplateKind kind;
  std::vector<int> offsets;  // 1 entry, or 2 for combination templates

  bool operator==(const FeatureTemplate&) const = default;

  std::string serialize() const {
    std::string s = template_kind_name(kind);
    s += ':';
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      if (i) s += ',';
      s += offset_str(offsets[i]);
    }
    return s;
  }

  static std::string offset_str(int o) {
    if (o > 0) return "+" + std::to_string(o);
    return std::to_string(o);
  }
};

struct TemplateSet {
  std::vector<FeatureTemplate> templates;
  std::string fingerprint;

  static TemplateSet make(std::vector<FeatureTemplate> tpls) {
    TemplateSet set;
    set.templates = std::move(tpls);
    std::string joined;
    for (const auto& t : set.templates) {
      joined += t.serialize();
      joined += '\n';
    }
    set.fingerprint = to_hex(fnv1a64(joined));
    return set;
  }
};

// The standard inventory: word, POS and word-length unigrams over offsets
// -2..+2 plus the four adjacent bigrams of each, left/right boundary-entropy
// buckets at the current position, and a word+POS pairing at every offset.
inline TemplateSet default_template_set() {
  std::vector<FeatureTemplate> t;
  for (TemplateKind k : {TemplateKind::Word, TemplateKind::POS, TemplateKind::WordLen}) {
    for (int o = -2; o <= 2; ++o) t.push_back({k, {o}});
    for (int o = -2; o <= 1; ++o) t.push_back({k, {o, o + 1}});
  }
  t.push_back({TemplateKind::Lien, {0}});
  t.push_back({TemplateKind::Rien, {0}});
  for (int o = -2; o <= 2; ++o) t.push_back({TemplateKind::Hybrid, {o, o}});
  return TemplateSet::make(std::move(t));
}

namespace detail {

inline std::string word_at(const Sentence& s, std::ptrdiff_t i) {
  if (i < 0) return kBos;
  if (i >= static_cast<std::ptrdiff_t>(s.size())) return kEos;
  return s.tokens[static_cast<std::size_t>(i)].surface;
}

inline std::string pos_at(const Sentence& s, std::ptrdiff_t i) {
  if (i < 0) return kBos;
  if (i >= static_cast<std::ptrdiff_t>(s.size())) return kEos;
  return s.tokens[static_cast<std::size_t>(i)].pos;
}

inline std::string wordlen_at(const Sentence& s, std::ptrdiff_t i) {
  if (i < 0) return kBos;
  if (i >= static_cast<std::ptrdiff_t>(s.size())) return kEos;
  return std::to_string(utf8_length(s.tokens[static_cast<std::size_t>(i)].surface));
}

inline std::string entropy_bucket_at(const Sentence& s, std::size_t i,
                                     const EntropyTable& table, Side side) {
  const auto* entry = table.find(s.tokens[i].surface);
  if (!entry) return "E0";  // unseen at tagging time
  double v = side == Side::Left ? entry->left : entry->right;
  return bucket_entropy(v, table, side);
}

}  // namespace detail

// Instantiates every template at `position`; returns one string per template,
// in template order. Out-of-range offsets contribute _BOS_/_EOS_.
inline std::vector<std::string> extract_features_at(const Sentence& sentence,
                                                    std::size_t position,
                                                    const TemplateSet& templates,
                                                    const EntropyTable& entropies) {
  if (position >= sentence.size())
    throw ContractError("feature position " + std::to_string(position) +
                        " out of range");
  std::vector<std::string> out;
  out.reserve(templates.templates.size());
  auto base = static_cast<std::ptrdiff_t>(position);
  for (const FeatureTemplate& t : templates.templates) {
    std::string f = template_kind_tag(t.kind);
    f += '[';
    // Hybrid stores two equal offsets; render just one.
    std::size_t shown = t.kind == TemplateKind::Hybrid ? 1 : t.offsets.size();
    for (std::size_t i = 0; i < shown; ++i) {
      if (i) f += ',';
      f += FeatureTemplate::offset_str(t.offsets[i]);
    }
    f += "]=";
    switch (t.kind) {
      case TemplateKind::Word:
        for (std::size_t i = 0; i < t.offsets.size(); ++i) {
          if (i) f += '|';
          f += detail::word_at(sentence, base + t.offsets[i]);
        }
        break;
      case TemplateKind::POS:
        for (std::size_t i = 0; i < t.offsets.size(); ++i) {
          if (i) f += '|';
          f += detail::pos_at(sentence, base + t.offsets[i]);
        }
        break;
      case TemplateKind::WordLen:
        for (std::size_t i = 0; i < t.offsets.size(); ++i) {
          if (i) f += '|';
          f += detail::wordlen_at(sentence, base + t.offsets[i]);
        }
        break;
      case TemplateKind::Lien:
        f += detail::entropy_bucket_at(sentence, position, entropies, Side::Left);
        break;
      case TemplateKind::Rien:
        f += detail::entropy_bucket_at(sentence, position, entropies, Side::Right);
        break;
      case TemplateKind::Hybrid:
        f += detail::word_at(sentence, base + t.offsets[0]);
        f += '|';
        f += detail::pos_at(sentence, base + t.offsets[0]);
        break;
    }
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dictionary: feature string -> contiguous index. Keys conjoin an observation
// string with the label (state features, "s:B:<obs>") or with a label bigram
// (transition features, "t:O>B:<obs>"); "t:O>B" with no observation part is a
// pure transition.

inline std::string state_feature_key(Label label, std::string_view obs) {
  std::string k = "s:";
  k += label_char(label);
  k += ':';
  k += obs;
  return k;
}

inline std::string transition_feature_key(Label prev, Label cur,
                                          std::string_view obs = {}) {
  std::string k = "t:";
  k += label_char(prev);
  k += '>';
  k += label_char(cur);
  if (!obs.empty()) {
    k += ':';
    k += obs;
  }
  return k;
}

class FeatureDictionary {
 public:
  // Returns the existing index, or assigns the next one. Not allowed once
  // frozen: decoding unseen data must not grow the parameter space.
  int add(const std::string& key) {
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    if (frozen_) throw ContractError("cannot add to a frozen dictionary");
    int id = static_cast<int>(strings_.size());
    strings_.push_back(key);
    index_.emplace(key, id);
    return id;
  }

  int lookup(const std::string& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? -1 : it->second;
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::size_t size() const { return strings_.size(); }
  const std::string& at(std::size_t i) const { return strings_.at(i); }
  const std::vector<std::string>& strings() const { return strings_; }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> strings_;
  bool frozen_ = false;
};

namespace detail {

// Scans a labeled corpus and registers the state and transition pairings it
// contains. Shared by build_dictionary and the CRF trainer (which prepends
// the nine pure label-bigram transitions first).
inline void scan_observed_pairings(FeatureDictionary& dict, const Corpus& corpus,
                                   const TemplateSet& templates,
                                   const EntropyTable& entropies) {
  if (!corpus.has_gold())
    throw ContractError("building a dictionary requires gold labels");
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const Sentence& sent = corpus.sentences[si];
    const LabelSequence& gold = corpus.gold[si];
    for (std::size_t i = 0; i < sent.size(); ++i) {
      auto feats = extract_features_at(sent, i, templates, entropies);
      for (const std::string& obs : feats) {
        dict.add(state_feature_key(gold[i], obs));
        if (i > 0) dict.add(transition_feature_key(gold[i - 1], gold[i], obs));
      }
    }
  }
}

}  // namespace detail

inline FeatureDictionary build_dictionary(const Corpus& corpus,
                                          const TemplateSet& templates,
                                          const EntropyTable& entropies) {
  FeatureDictionary dict;
  detail::scan_observed_pairings(dict, corpus, templates, entropies);
  dict.freeze();
  return dict;
}

}  // namespace hypotax
