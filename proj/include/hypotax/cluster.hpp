#pragma once

// Threshold agglomerative clustering over a concept similarity matrix, plus
// the hyponymy readout. Each round greedily merges the pair of clusters with
// the highest inter-cluster similarity, as long as that similarity is
// strictly above the threshold. Every merge relates the absorbed cluster's
// representative (its highest-frequency member) to the representative of the
// merged cluster as ISA(hyponym, hypernym).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hypotax/error.hpp"
#include "hypotax/util.hpp"
#include "hypotax/wordspace.hpp"

namespace hypotax {

enum class Linkage { Average, Complete, Single };

inline const char* linkage_name(Linkage l) {
  switch (l) {
    case Linkage::Average: return "average";
    case Linkage::Complete: return "complete";
    default: return "single";
  }
}

inline bool linkage_from_name(std::string_view s, Linkage& out) {
  if (s == "average") out = Linkage::Average;
  else if (s == "complete") out = Linkage::Complete;
  else if (s == "single") out = Linkage::Single;
  else return false;
  return true;
}

struct ClusterConfig {
  double threshold = 0.5;
  Linkage linkage = Linkage::Average;

  void validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0))
      throw ConfigError("threshold must be in [0, 1]");
  }
};

// Similarity between two disjoint clusters given by their member concept
// indices: the mean (average linkage), minimum (complete) or maximum (single)
// of all cross-pair similarities.
inline double inter_cluster_similarity(const std::vector<std::size_t>& a,
                                       const std::vector<std::size_t>& b,
                                       const SimilarityMatrix& matrix,
                                       Linkage linkage) {
  if (a.empty() || b.empty()) throw ContractError("empty cluster");
  for (std::size_t i : a)
    for (std::size_t j : b)
      if (i == j) throw ContractError("overlapping clusters");
  double sum = 0.0;
  double best = 0.0;
  bool first = true;
  for (std::size_t i : a)
    for (std::size_t j : b) {
      double s = matrix.at(i, j);
      sum += s;
      if (first) {
        best = s;
        first = false;
      } else if (linkage == Linkage::Complete ? s < best : s > best) {
        best = s;
      }
    }
  if (linkage == Linkage::Average)
    return sum / static_cast<double>(a.size() * b.size());
  return best;
}

struct Dendrogram {
  std::vector<std::string> concepts;  // leaves; leaf i has cluster id i

  struct Merge {
    std::size_t a;  // consumed cluster ids
    std::size_t b;
    double similarity;  // merge id = concepts.size() + merge index
  };
  std::vector<Merge> merges;

  // Final partition: member indices sorted ascending, clusters ordered by
  // their smallest member. final_ids[k] is the cluster id of final_clusters[k].
  std::vector<std::vector<std::size_t>> final_clusters;
  std::vector<std::size_t> final_ids;
};

inline Dendrogram agglomerate(const SimilarityMatrix& matrix,
                              const ClusterConfig& config) {
  config.validate();
  std::size_t n = matrix.size();
  if (n < 1) throw ContractError("clustering needs at least one concept");

  struct Active {
    std::size_t id;
    std::vector<std::size_t> members;
  };
  std::vector<Active> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({i, {i}});

  Dendrogram dg;
  dg.concepts = matrix.concepts();

  // Cached inter-cluster similarities between active clusters, indexed by
  // position in `active`. Only the merged cluster's row is recomputed per
  // round; entries always equal a fresh inter_cluster_similarity call.
  std::vector<std::vector<double>> sims(active.size(),
                                        std::vector<double>(active.size(), 0.0));
  for (std::size_t i = 0; i < active.size(); ++i)
    for (std::size_t j = i + 1; j < active.size(); ++j)
      sims[i][j] = inter_cluster_similarity(active[i].members, active[j].members,
                                            matrix, config.linkage);

  while (active.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = sims[0][1];
    for (std::size_t i = 0; i < active.size(); ++i)
      for (std::size_t j = i + 1; j < active.size(); ++j)
        if (sims[i][j] > best) {
          best = sims[i][j];
          bi = i;
          bj = j;
        }
    if (!(best > config.threshold)) break;

    dg.merges.push_back({active[bi].id, active[bj].id, best});
    std::vector<std::size_t> merged;
    std::merge(active[bi].members.begin(), active[bi].members.end(),
               active[bj].members.begin(), active[bj].members.end(),
               std::back_inserter(merged));
    active[bi] = Active{n + dg.merges.size() - 1, std::move(merged)};
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    for (auto& row : sims) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bj));
    sims.erase(sims.begin() + static_cast<std::ptrdiff_t>(bj));
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (k == bi) continue;
      double s = inter_cluster_similarity(active[std::min(k, bi)].members,
                                          active[std::max(k, bi)].members, matrix,
                                          config.linkage);
      sims[std::min(k, bi)][std::max(k, bi)] = s;
    }
  }

  for (const Active& c : active) {
    dg.final_clusters.push_back(c.members);
    dg.final_ids.push_back(c.id);
  }
  return dg;
}

// ---------------------------------------------------------------------------
// Hyponymy readout

struct IsaRelation {
  std::string hyponym;
  std::string hypernym;

  bool operator==(const IsaRelation&) const = default;
  auto operator<=>(const IsaRelation&) const = default;
};

namespace detail {

// Highest corpus frequency wins; ties go to the lexicographically smallest.
inline std::string representative(const std::vector<std::size_t>& members,
                                  const std::vector<std::string>& concepts,
                                  const std::map<std::string, std::uint64_t>& freqs) {
  const std::string* best = nullptr;
  std::uint64_t best_f = 0;
  for (std::size_t m : members) {
    const std::string& c = concepts[m];
    auto it = freqs.find(c);
    if (it == freqs.end())
      throw ContractError("no frequency for concept '" + c + "'");
    if (!best || it->second > best_f || (it->second == best_f && c < *best)) {
      best = &c;
      best_f = it->second;
    }
  }
  return *best;
}

}  // namespace detail

// By default every merge contributes: each consumed cluster whose
// representative differs from the merged cluster's representative yields
// ISA(child representative, merged representative). With final_clusters_only
// set, only the final partition is read out: every member of a final cluster
// maps to that cluster's representative.
inline std::vector<IsaRelation> derive_hyponymy(
    const Dendrogram& dg, const std::map<std::string, std::uint64_t>& frequencies,
    bool final_clusters_only = false) {
  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < dg.concepts.size(); ++i) members[i] = {i};
  std::size_t next_id = dg.concepts.size();
  std::set<IsaRelation> relations;

  for (const Dendrogram::Merge& m : dg.merges) {
    auto ita = members.find(m.a);
    auto itb = members.find(m.b);
    if (ita == members.end() || itb == members.end())
      throw ContractError("merge references a consumed or unknown cluster id");
    std::vector<std::size_t> merged;
    std::merge(ita->second.begin(), ita->second.end(), itb->second.begin(),
               itb->second.end(), std::back_inserter(merged));
    std::string parent = detail::representative(merged, dg.concepts, frequencies);
    if (!final_clusters_only) {
      for (const auto* child : {&ita->second, &itb->second}) {
        std::string rep = detail::representative(*child, dg.concepts, frequencies);
        if (rep != parent) relations.insert({rep, parent});
      }
    }
    members.erase(ita);
    members.erase(itb);
    members[next_id++] = std::move(merged);
  }

  if (final_clusters_only) {
    for (const auto& cluster : dg.final_clusters) {
      std::string rep = detail::representative(cluster, dg.concepts, frequencies);
      for (std::size_t m : cluster)
        if (dg.concepts[m] != rep) relations.insert({dg.concepts[m], rep});
    }
  }

  std::vector<IsaRelation> out(relations.begin(), relations.end());
  std::sort(out.begin(), out.end(), [](const IsaRelation& x, const IsaRelation& y) {
    if (x.hypernym != y.hypernym) return x.hypernym < y.hypernym;
    return x.hyponym < y.hyponym;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

inline std::string dendrogram_to_string(const Dendrogram& dg) {
  std::string out;
  for (std::size_t s = 0; s < dg.merges.size(); ++s)
    out += std::to_string(s + 1) + "\t" + std::to_string(dg.merges[s].a) + "\t" +
           std::to_string(dg.merges[s].b) + "\t" +
           format_fixed(dg.merges[s].similarity, 6) + "\n";
  return out;
}

inline void save_dendrogram(const Dendrogram& dg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << dendrogram_to_string(dg);
}

inline std::string relations_to_string(const std::vector<IsaRelation>& relations) {
  std::string out;
  for (const IsaRelation& r : relations) out += r.hyponym + "\t" + r.hypernym + "\n";
  return out;
}

inline void save_relations(const std::vector<IsaRelation>& relations,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << relations_to_string(relations);
}

inline std::vector<IsaRelation> load_relations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::vector<IsaRelation> out;
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
    out.push_back({std::string(cols[0]), std::string(cols[1])});
  }
  return out;
}

}  // namespace hypotax
