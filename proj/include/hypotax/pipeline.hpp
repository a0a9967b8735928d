#pragma once

// The CLI stages as plain functions over a PipelineConfig. `run_extract` is
// literally tag + vectors + cluster, so the composed path and the one-shot
// path write identical bytes. Every stage validates the inputs it reads and
// leaves its artifacts in the configured workdir.

#include <filesystem>
#include <string>
#include <vector>

#include "hypotax/cascade.hpp"
#include "hypotax/cluster.hpp"
#include "hypotax/config.hpp"
#include "hypotax/corpus.hpp"
#include "hypotax/crf.hpp"
#include "hypotax/error.hpp"
#include "hypotax/eval.hpp"
#include "hypotax/wordspace.hpp"

namespace hypotax::pipeline {

struct Artifacts {
  std::filesystem::path tagged;
  std::filesystem::path inventory;
  std::filesystem::path vectors;
  std::filesystem::path matrix;
  std::filesystem::path dendrogram;
  std::filesystem::path relations;
  std::filesystem::path report;
};

inline Artifacts artifacts(const PipelineConfig& cfg) {
  const auto& w = cfg.workdir;
  return Artifacts{w / "tagged.tsv",     w / "inventory.tsv", w / "vectors.tsv",
                   w / "matrix.tsv",     w / "dendrogram.tsv", w / "relations.tsv",
                   w / "report.tsv"};
}

namespace detail {

inline void require_path(const std::filesystem::path& p, const char* key) {
  if (p.empty())
    throw ConfigError(std::string("config key '") + key + "' is required");
  if (!std::filesystem::exists(p))
    throw ConfigError(std::string(key) + " path does not exist: " + p.string());
}

inline void require_workdir(const PipelineConfig& cfg) {
  if (cfg.workdir.empty()) throw ConfigError("config key 'workdir' is required");
  std::filesystem::create_directories(cfg.workdir);
}

inline void require_key(const std::filesystem::path& p, const char* key) {
  if (p.empty())
    throw ConfigError(std::string("config key '") + key + "' is required");
}

// Rows in the 4-column format, with the layer-2 labels re-aligned from the
// merged tokens back onto the first row of each layer-1 span.
inline std::string tagged_to_string(const Sentence& sent, const TagResult& tag) {
  std::string out;
  std::vector<std::string> label2(sent.size(), "_");
  for (std::size_t m = 0; m < tag.merged.provenance.size(); ++m)
    label2[tag.merged.provenance[m].start] =
        std::string(1, label_char(tag.high_labels[m]));
  for (std::size_t i = 0; i < sent.size(); ++i) {
    out += sent.tokens[i].surface;
    out += '\t';
    out += sent.tokens[i].pos;
    out += '\t';
    out += label_char(tag.low_labels[i]);
    out += '\t';
    out += label2[i];
    out += '\n';
  }
  out += '\n';
  return out;
}

}  // namespace detail

inline void run_train(const PipelineConfig& cfg) {
  detail::require_path(cfg.train_corpus, "train_corpus");
  detail::require_key(cfg.model_low, "model_low");
  detail::require_key(cfg.model_high, "model_high");
  CascadeTrainData data = load_cascade_corpus(cfg.train_corpus);
  if (data.corpus.sentences.empty())
    throw ContractError("training corpus has no sentences");
  CascadeModel model = train_cascade(data, cfg.train, cfg.train);
  for (const auto& p : {cfg.model_low, cfg.model_high})
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  save_model(model.low, cfg.model_low);
  save_model(model.high, cfg.model_high);
}

inline CascadeModel load_cascade_model(const PipelineConfig& cfg) {
  detail::require_path(cfg.model_low, "model_low");
  detail::require_path(cfg.model_high, "model_high");
  return CascadeModel{load_model(cfg.model_low), load_model(cfg.model_high)};
}

inline void run_tag(const PipelineConfig& cfg) {
  detail::require_path(cfg.raw_corpus, "raw_corpus");
  detail::require_workdir(cfg);
  CascadeModel model = load_cascade_model(cfg);
  Corpus corpus = load_corpus(cfg.raw_corpus, /*has_labels=*/false);
  Artifacts art = artifacts(cfg);

  std::ofstream tagged(art.tagged);
  if (!tagged) throw Error("cannot write " + art.tagged.string());
  TermInventory inv;
  for (const Sentence& sent : corpus.sentences) {
    if (sent.size() == 0) continue;
    TagResult tag = tag_cascade(model, sent);
    tagged << detail::tagged_to_string(sent, tag);
    for (const TermSpan& sp : bio_decode(sent, tag.low_labels)) ++inv.simple[sp.text];
    for (const TermSpan& sp : bio_decode(tag.merged.sentence, tag.high_labels))
      if (complex_span_qualifies(tag.merged, sp.start, sp.end))
        ++inv.complex[sp.text];
  }
  save_inventory(inv, art.inventory);
}

inline void run_vectors(const PipelineConfig& cfg) {
  detail::require_path(cfg.raw_corpus, "raw_corpus");
  detail::require_workdir(cfg);
  Artifacts art = artifacts(cfg);
  detail::require_path(art.inventory, "inventory (run 'tag' first)");
  TermInventory inv = load_inventory(art.inventory);
  Corpus corpus = load_corpus(cfg.raw_corpus, /*has_labels=*/false);
  save_vectors(build_vectors(corpus, inv, cfg.window), art.vectors);
}

inline void run_cluster(const PipelineConfig& cfg, bool final_clusters_only = false) {
  detail::require_workdir(cfg);
  Artifacts art = artifacts(cfg);
  detail::require_path(art.vectors, "vectors (run 'vectors' first)");
  detail::require_path(art.inventory, "inventory (run 'tag' first)");
  auto vectors = load_vectors(art.vectors);
  TermInventory inv = load_inventory(art.inventory);

  if (vectors.size() < 2) {
    // Nothing to relate; write empty artifacts so downstream steps see files.
    std::string header;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (i) header += '\t';
      header += vectors[i].term;
    }
    header += '\n';
    std::ofstream(art.matrix) << header;
    std::ofstream(art.dendrogram) << "";
    std::ofstream(art.relations) << "";
    return;
  }
  SimilarityMatrix matrix = build_matrix(vectors);
  save_matrix(matrix, art.matrix);
  Dendrogram dg = agglomerate(matrix, cfg.cluster);
  save_dendrogram(dg, art.dendrogram);
  auto relations = derive_hyponymy(dg, inv.frequencies(), final_clusters_only);
  save_relations(relations, art.relations);
}

inline void run_extract(const PipelineConfig& cfg, bool final_clusters_only = false) {
  run_tag(cfg);
  run_vectors(cfg);
  run_cluster(cfg, final_clusters_only);
}

inline EvalReport run_evaluate(const PipelineConfig& cfg,
                               const std::filesystem::path& relations_path) {
  detail::require_path(cfg.gold, "gold");
  if (!std::filesystem::exists(relations_path))
    throw ConfigError("relations path does not exist: " + relations_path.string());
  auto relations = load_relations(relations_path);
  GoldSet gold = load_gold(cfg.gold);
  return evaluate(relations, gold);
}

inline std::vector<SweepRow> run_sweep(const PipelineConfig& cfg) {
  if (cfg.sweep.empty())
    throw ConfigError("sweep is disabled: no 'sweep' settings in config");
  detail::require_path(cfg.raw_corpus, "raw_corpus");
  detail::require_path(cfg.gold, "gold");
  detail::require_workdir(cfg);
  Artifacts art = artifacts(cfg);
  detail::require_path(art.inventory, "inventory (run 'tag' first)");
  TermInventory inv = load_inventory(art.inventory);
  Corpus corpus = load_corpus(cfg.raw_corpus, /*has_labels=*/false);
  GoldSet gold = load_gold(cfg.gold);
  auto rows = sweep(corpus, inv, gold, cfg.sweep, cfg.cluster);
  std::ofstream report(art.report);
  if (!report) throw Error("cannot write " + art.report.string());
  report << render_report_tsv(rows);
  return rows;
}

}  // namespace hypotax::pipeline
