#pragma once

// Shared test fixtures: brute-force CRF oracles over exhaustive labelings, a
// random model builder, a rescan-every-round clustering oracle, and the
// synthetic cascade corpus generator used by the training fixtures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hypotax/cascade.hpp"
#include "hypotax/cluster.hpp"
#include "hypotax/corpus.hpp"
#include "hypotax/crf.hpp"
#include "hypotax/features.hpp"
#include "hypotax/wordspace.hpp"

namespace testutil {

using hypotax::Corpus;
using hypotax::CrfModel;
using hypotax::Label;
using hypotax::LabelSequence;
using hypotax::PositionFeatures;
using hypotax::Sentence;
using hypotax::Token;

inline Sentence make_sentence(
    std::initializer_list<std::pair<const char*, const char*>> tokens) {
  Sentence s;
  for (const auto& [surface, pos] : tokens) s.tokens.push_back(Token{surface, pos});
  return s;
}

// All 3^n labelings, in base-3 counting order with digit 0=B, 1=I, 2=O.
inline std::vector<LabelSequence> all_labelings(std::size_t n) {
  std::vector<LabelSequence> out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    LabelSequence seq(n);
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      seq[i] = static_cast<Label>(c % 3);
      c /= 3;
    }
    out.push_back(std::move(seq));
  }
  return out;
}

inline std::vector<LabelSequence> valid_labelings(std::size_t n) {
  std::vector<LabelSequence> out;
  for (auto& seq : all_labelings(n))
    if (hypotax::labels_valid(seq)) out.push_back(std::move(seq));
  return out;
}

// Per-dictionary-index firing counts of a labeling; an oracle independent of
// the ParamIndex fast path (dot with the weights gives the sequence score).
inline std::vector<double> feature_counts(const CrfModel& model,
                                          const LabelSequence& labels,
                                          const PositionFeatures& feats) {
  const auto& dict = model.dictionary();
  std::vector<double> counts(dict.size(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (const std::string& obs : feats[i]) {
      int k = dict.lookup(hypotax::state_feature_key(labels[i], obs));
      if (k >= 0) counts[static_cast<std::size_t>(k)] += 1.0;
      if (i > 0) {
        int t = dict.lookup(
            hypotax::transition_feature_key(labels[i - 1], labels[i], obs));
        if (t >= 0) counts[static_cast<std::size_t>(t)] += 1.0;
      }
    }
    if (i > 0) {
      int p = dict.lookup(hypotax::transition_feature_key(labels[i - 1], labels[i]));
      if (p >= 0) counts[static_cast<std::size_t>(p)] += 1.0;
    }
  }
  return counts;
}

inline double brute_log_partition(const CrfModel& model, const Sentence& sentence,
                                  const PositionFeatures& feats) {
  std::vector<double> scores;
  for (const auto& labels : all_labelings(sentence.size()))
    scores.push_back(hypotax::score_sequence(model, sentence, labels, feats));
  double m = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - m);
  return m + std::log(sum);
}

inline std::vector<double> brute_expectations(const CrfModel& model,
                                              const Sentence& sentence,
                                              const PositionFeatures& feats) {
  double logz = brute_log_partition(model, sentence, feats);
  std::vector<double> expected(model.dictionary().size(), 0.0);
  for (const auto& labels : all_labelings(sentence.size())) {
    double p =
        std::exp(hypotax::score_sequence(model, sentence, labels, feats) - logz);
    auto counts = feature_counts(model, labels, feats);
    for (std::size_t k = 0; k < counts.size(); ++k) expected[k] += p * counts[k];
  }
  return expected;
}

// A valid BIO sequence sampled label by label (I only where the grammar
// allows it); works for any length, unlike exhaustive enumeration.
inline LabelSequence random_valid_labeling(std::mt19937& rng, std::size_t n) {
  LabelSequence seq(n);
  std::uniform_int_distribution<int> d3(0, 2);
  std::uniform_int_distribution<int> d2(0, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && seq[i - 1] != Label::O) {
      seq[i] = static_cast<Label>(d3(rng));
    } else {
      seq[i] = d2(rng) == 0 ? Label::B : Label::O;
    }
  }
  return seq;
}

// Small random labeled corpora over a fixed vocabulary.
inline Corpus random_corpus(std::mt19937& rng, std::size_t sentences,
                            std::size_t max_len) {
  static const std::vector<std::pair<const char*, const char*>> vocab = {
      {"如何", "r"}, {"安装", "v"}, {"备份", "n"}, {"域", "n"},
      {"控制", "n"}, {"器", "n"},   {"磁盘", "n"}, {"查看", "v"}};
  Corpus corpus;
  std::uniform_int_distribution<std::size_t> len_d(1, max_len);
  std::uniform_int_distribution<std::size_t> word_d(0, vocab.size() - 1);
  for (std::size_t s = 0; s < sentences; ++s) {
    std::size_t n = len_d(rng);
    Sentence sent;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& [w, p] = vocab[word_d(rng)];
      sent.tokens.push_back(Token{w, p});
    }
    corpus.gold.push_back(random_valid_labeling(rng, n));
    corpus.sentences.push_back(std::move(sent));
  }
  return corpus;
}

// A lighter template set keeps the random-instance dictionaries small enough
// for exhaustive oracles.
inline hypotax::TemplateSet small_template_set() {
  using hypotax::FeatureTemplate;
  using hypotax::TemplateKind;
  std::vector<FeatureTemplate> t;
  for (int o = -1; o <= 1; ++o) t.push_back({TemplateKind::Word, {o}});
  t.push_back({TemplateKind::POS, {0}});
  t.push_back({TemplateKind::WordLen, {0}});
  t.push_back({TemplateKind::Hybrid, {0, 0}});
  return hypotax::TemplateSet::make(std::move(t));
}

struct RandomInstance {
  Corpus corpus;
  hypotax::EntropyTable entropies;
  CrfModel model;
};

inline RandomInstance random_instance(std::mt19937& rng, std::size_t sentences,
                                      std::size_t max_len,
                                      const hypotax::TemplateSet& templates,
                                      double lo = -2.0, double hi = 2.0) {
  Corpus corpus = random_corpus(rng, sentences, max_len);
  auto entropies = hypotax::compute_boundary_entropies(corpus);
  auto dict = hypotax::build_parameter_dictionary(corpus, templates, entropies);
  std::uniform_real_distribution<double> w_d(lo, hi);
  std::vector<double> weights(dict.size());
  for (double& w : weights) w = w_d(rng);
  CrfModel model(templates, entropies, std::move(dict), std::move(weights));
  return RandomInstance{std::move(corpus), std::move(entropies), std::move(model)};
}

// ---------------------------------------------------------------------------
// Clustering oracle: recompute every inter-cluster similarity from scratch
// each round instead of maintaining a cached table. Argument order follows
// cluster position (smaller position first) to match agglomerate exactly.

inline hypotax::Dendrogram naive_agglomerate(const hypotax::SimilarityMatrix& matrix,
                                             const hypotax::ClusterConfig& config) {
  config.validate();
  std::size_t n = matrix.size();
  struct Active {
    std::size_t id;
    std::vector<std::size_t> members;
  };
  std::vector<Active> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({i, {i}});
  hypotax::Dendrogram dg;
  dg.concepts = matrix.concepts();
  while (active.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = hypotax::inter_cluster_similarity(active[0].members,
                                                    active[1].members, matrix,
                                                    config.linkage);
    for (std::size_t i = 0; i < active.size(); ++i)
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        double s = hypotax::inter_cluster_similarity(active[i].members,
                                                     active[j].members, matrix,
                                                     config.linkage);
        if (s > best) {
          best = s;
          bi = i;
          bj = j;
        }
      }
    if (!(best > config.threshold)) break;
    dg.merges.push_back({active[bi].id, active[bj].id, best});
    std::vector<std::size_t> merged;
    std::merge(active[bi].members.begin(), active[bi].members.end(),
               active[bj].members.begin(), active[bj].members.end(),
               std::back_inserter(merged));
    active[bi] = Active{n + dg.merges.size() - 1, std::move(merged)};
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  for (const Active& c : active) {
    dg.final_clusters.push_back(c.members);
    dg.final_ids.push_back(c.id);
  }
  return dg;
}

inline bool dendrograms_equal(const hypotax::Dendrogram& a,
                              const hypotax::Dendrogram& b) {
  if (a.concepts != b.concepts || a.merges.size() != b.merges.size()) return false;
  for (std::size_t i = 0; i < a.merges.size(); ++i) {
    if (a.merges[i].a != b.merges[i].a || a.merges[i].b != b.merges[i].b ||
        a.merges[i].similarity != b.merges[i].similarity)
      return false;
  }
  return a.final_clusters == b.final_clusters && a.final_ids == b.final_ids;
}

inline hypotax::SimilarityMatrix random_matrix(std::mt19937& rng, std::size_t n) {
  std::vector<std::string> concepts;
  for (std::size_t i = 0; i < n; ++i) concepts.push_back("c" + std::to_string(i));
  std::uniform_real_distribution<double> sim_d(0.0, 1.0);
  std::vector<double> upper(n * (n - 1) / 2);
  for (double& v : upper) v = sim_d(rng);
  return hypotax::SimilarityMatrix(std::move(concepts), std::move(upper));
}

// ---------------------------------------------------------------------------
// Synthetic cascade corpus: ten two-token simple terms built from unique
// component words, four fixed compounds of adjacent term pairs, and filler
// words between all term slots. Word identity fully determines both layers'
// labels, so a trained cascade should approach perfect accuracy.

inline std::string synth_cascade_text(std::mt19937& rng, std::size_t sentences) {
  static const std::vector<std::pair<const char*, const char*>> parts = {
      {"disk", "array"},  {"raid", "control"}, {"backup", "domain"},
      {"file", "server"}, {"data", "base"},    {"net", "card"},
      {"index", "node"},  {"task", "queue"},   {"cache", "unit"},
      {"log", "store"}};
  static const std::vector<std::pair<std::size_t, std::size_t>> pairs = {
      {0, 1}, {2, 3}, {4, 5}, {6, 7}};
  static const std::vector<std::pair<const char*, const char*>> fillers = {
      {"how", "r"}, {"to", "p"},  {"install", "v"}, {"use", "v"}, {"we", "r"},
      {"see", "v"}, {"the", "d"}, {"run", "v"},     {"set", "v"}, {"query", "v"}};

  std::uniform_int_distribution<int> coin(0, 99);
  std::uniform_int_distribution<std::size_t> term_d(0, parts.size() - 1);
  std::uniform_int_distribution<std::size_t> pair_d(0, pairs.size() - 1);
  std::uniform_int_distribution<std::size_t> fill_d(0, fillers.size() - 1);
  std::uniform_int_distribution<int> fill_n(1, 2);

  std::string out;
  auto filler_row = [&]() {
    const auto& [w, p] = fillers[fill_d(rng)];
    out += std::string(w) + "\t" + p + "\tO\tO\n";
  };
  auto term_rows = [&](std::size_t t, const char* label2_first) {
    out += std::string(parts[t].first) + "\tn\tB\t" + label2_first + "\n";
    out += std::string(parts[t].second) + "\tn\tI\t_\n";
  };
  for (std::size_t s = 0; s < sentences; ++s) {
    int f = fill_n(rng);
    for (int i = 0; i < f; ++i) filler_row();
    if (coin(rng) < 50) {
      auto [t1, t2] = pairs[pair_d(rng)];
      term_rows(t1, "B");
      term_rows(t2, "I");
    } else {
      term_rows(term_d(rng), "O");
    }
    f = fill_n(rng);
    for (int i = 0; i < f; ++i) filler_row();
    if (coin(rng) < 40) {
      term_rows(term_d(rng), "O");
      filler_row();
    }
    out += "\n";
  }
  return out;
}

inline hypotax::CascadeTrainData synth_cascade(std::mt19937& rng,
                                               std::size_t sentences) {
  std::istringstream in(synth_cascade_text(rng, sentences));
  return hypotax::parse_cascade_corpus(in, "<synthetic>");
}

// The two-layer worked example: two simple terms back to back forming one
// complex term, preceded by ordinary words.
inline std::string worked_example_text() {
  return
      "如何\tr\tO\tO\n"
      "安装\tv\tO\tO\n"
      "备份\tn\tB\tB\n"
      "域\tn\tI\t_\n"
      "控制\tn\tB\tI\n"
      "器\tn\tI\t_\n"
      "\n";
}

inline hypotax::CascadeTrainData worked_example_data() {
  std::istringstream in(worked_example_text());
  return hypotax::parse_cascade_corpus(in, "<example>");
}

}  // namespace testutil
