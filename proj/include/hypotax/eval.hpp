#pragma once

// Relation evaluation and the parameter sweep. Matching is exact and
// direction-sensitive on (hyponym, hypernym) string pairs; precision and
// recall are percentages with the usual zero conventions, and F is their
// harmonic mean. Percentages are kept at full precision internally and only
// cut to two decimals when rendered.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hypotax/cascade.hpp"
#include "hypotax/cluster.hpp"
#include "hypotax/corpus.hpp"
#include "hypotax/error.hpp"
#include "hypotax/util.hpp"
#include "hypotax/wordspace.hpp"

namespace hypotax {

struct GoldSet {
  std::set<std::pair<std::string, std::string>> relations;  // (hyponym, hypernym)
};

inline GoldSet load_gold(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  GoldSet gold;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2)
      throw ParseError(path.string(), line_no, "expected 2 columns");
    if (cols[0].empty() || cols[1].empty())
      throw ParseError(path.string(), line_no, "empty relation member");
    if (cols[0] == cols[1])
      throw ParseError(path.string(), line_no, "self-relation in gold set");
    gold.relations.emplace(std::string(cols[0]), std::string(cols[1]));
  }
  return gold;
}

struct EvalReport {
  std::size_t extracted = 0;
  std::size_t correct = 0;
  std::size_t gold = 0;
  double precision = 0.0;  // percentages, full precision
  double recall = 0.0;
  double f = 0.0;
};

inline double f_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

inline EvalReport evaluate(const std::vector<IsaRelation>& extracted,
                           const GoldSet& gold) {
  std::set<std::pair<std::string, std::string>> unique;
  for (const IsaRelation& r : extracted) unique.emplace(r.hyponym, r.hypernym);
  EvalReport rep;
  rep.extracted = unique.size();
  rep.gold = gold.relations.size();
  for (const auto& r : unique)
    if (gold.relations.count(r)) ++rep.correct;
  rep.precision = rep.extracted == 0
                      ? 0.0
                      : 100.0 * static_cast<double>(rep.correct) /
                            static_cast<double>(rep.extracted);
  rep.recall = rep.gold == 0 ? 0.0
                             : 100.0 * static_cast<double>(rep.correct) /
                                   static_cast<double>(rep.gold);
  rep.f = f_score(rep.precision, rep.recall);
  return rep;
}

// ---------------------------------------------------------------------------
// Parameter sweep: one row per (window, dimension) setting, clustering config
// held fixed. A failing setting is marked and does not stop the others.

struct SweepRow {
  WindowConfig window;
  EvalReport report;
  bool ok = false;
  std::string error;
};

inline std::vector<SweepRow> sweep(const Corpus& corpus,
                                   const TermInventory& inventory,
                                   const GoldSet& gold,
                                   const std::vector<WindowConfig>& settings,
                                   const ClusterConfig& cluster) {
  if (settings.empty()) throw ContractError("sweep needs at least one setting");
  cluster.validate();
  auto frequencies = inventory.frequencies();
  std::vector<SweepRow> rows;
  for (const WindowConfig& window : settings) {
    SweepRow row;
    row.window = window;
    try {
      auto vectors = build_vectors(corpus, inventory, window);
      std::vector<IsaRelation> relations;
      if (vectors.size() >= 2) {
        SimilarityMatrix matrix = build_matrix(vectors);
        Dendrogram dg = agglomerate(matrix, cluster);
        relations = derive_hyponymy(dg, frequencies);
      }
      row.report = evaluate(relations, gold);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string render_report_tsv(const std::vector<SweepRow>& rows) {
  std::string out =
      "window\tdim\textracted\tcorrect\tgold\trecall\tprecision\tf\n";
  for (const SweepRow& row : rows) {
    out += "[" + std::to_string(row.window.left) + "," +
           std::to_string(row.window.right) + "]\t" +
           std::to_string(row.window.dimension) + "\t";
    if (!row.ok) {
      out += "ERROR: " + row.error + "\t\t\t\t\t\n";
      continue;
    }
    const EvalReport& r = row.report;
    out += std::to_string(r.extracted) + "\t" + std::to_string(r.correct) + "\t" +
           std::to_string(r.gold) + "\t" + format_percent(r.recall) + "\t" +
           format_percent(r.precision) + "\t" + format_percent(r.f) + "\n";
  }
  return out;
}

inline std::string render_report_text(const std::vector<SweepRow>& rows) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s %5s %10s %8s %6s %8s %10s %8s\n", "window",
                "dim", "extracted", "correct", "gold", "recall", "precision", "f");
  out += buf;
  for (const SweepRow& row : rows) {
    std::string window = "[" + std::to_string(row.window.left) + "," +
                         std::to_string(row.window.right) + "]";
    if (!row.ok) {
      std::snprintf(buf, sizeof(buf), "%-10s %5zu FAILED: %s\n", window.c_str(),
                    row.window.dimension, row.error.c_str());
      out += buf;
      continue;
    }
    const EvalReport& r = row.report;
    std::snprintf(buf, sizeof(buf), "%-10s %5zu %10zu %8zu %6zu %8s %10s %8s\n",
                  window.c_str(), row.window.dimension, r.extracted, r.correct,
                  r.gold, format_percent(r.recall).c_str(),
                  format_percent(r.precision).c_str(), format_percent(r.f).c_str());
    out += buf;
  }
  return out;
}

inline std::string render_eval_text(const EvalReport& r) {
  std::string out;
  out += "extracted\t" + std::to_string(r.extracted) + "\n";
  out += "correct\t" + std::to_string(r.correct) + "\n";
  out += "gold\t" + std::to_string(r.gold) + "\n";
  out += "precision\t" + format_percent(r.precision) + "\n";
  out += "recall\t" + format_percent(r.recall) + "\n";
  out += "f\t" + format_percent(r.f) + "\n";
  return out;
}

}  // namespace hypotax
