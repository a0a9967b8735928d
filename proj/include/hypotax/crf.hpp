#pragma once

// Linear-chain CRF over the fixed label set {B, I, O}.
//
// The distribution is p(s|o) = exp(sum_i sum_k w_k f_k(s_{i-1}, s_i, o, i)) / Z(o)
// with three families of features: observation strings conjoined with the
// current label (state features), observation strings conjoined with a label
// bigram (transition features), and the nine pure label bigrams. The partition
// function and the marginal expectations run over the full unconstrained
// lattice of 3^n labelings; the BIO grammar (no leading I, no I after O) is
// imposed only when decoding, where forbidden moves score -inf.
//
// Training maximizes the L2-penalized log-likelihood
//   sum_j [score(gold_j) - log Z_j] - sum_k w_k^2 / (2 sigma^2)
// with a deterministic L-BFGS ascent and backtracking line search, starting
// from zero weights, so a fixed config reproduces weights bit for bit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "hypotax/corpus.hpp"
#include "hypotax/error.hpp"
#include "hypotax/features.hpp"
#include "hypotax/util.hpp"

namespace hypotax {

using PositionFeatures = std::vector<std::vector<std::string>>;

inline PositionFeatures extract_sentence_features(const Sentence& sentence,
                                                  const TemplateSet& templates,
                                                  const EntropyTable& entropies) {
  PositionFeatures feats;
  feats.reserve(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i)
    feats.push_back(extract_features_at(sentence, i, templates, entropies));
  return feats;
}

namespace detail {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Fast lookup tables derived from the dictionary: observation strings are
// interned and mapped to the parameter indices of their label pairings.
struct ParamIndex {
  std::unordered_map<std::string, std::int32_t> obs_id;
  std::vector<std::array<std::int32_t, 3>> state_k;  // [obs][label]
  std::vector<std::array<std::int32_t, 9>> trans_k;  // [obs][prev*3+cur]
  std::array<std::int32_t, 9> pure_k;                // [prev*3+cur]

  static ParamIndex build(const FeatureDictionary& dict) {
    ParamIndex idx;
    idx.pure_k.fill(-1);
    auto intern = [&idx](const std::string& obs) {
      auto it = idx.obs_id.find(obs);
      if (it != idx.obs_id.end()) return it->second;
      auto id = static_cast<std::int32_t>(idx.state_k.size());
      idx.obs_id.emplace(obs, id);
      idx.state_k.push_back({-1, -1, -1});
      idx.trans_k.push_back({-1, -1, -1, -1, -1, -1, -1, -1, -1});
      return id;
    };
    auto label_index = [](char c) -> int {
      switch (c) {
        case 'B': return 0;
        case 'I': return 1;
        case 'O': return 2;
        default: return -1;
      }
    };
    for (std::size_t k = 0; k < dict.size(); ++k) {
      const std::string& key = dict.at(k);
      bool ok = false;
      if (key.size() >= 4 && key[0] == 's' && key[1] == ':' && key[3] == ':') {
        int s = label_index(key[2]);
        if (s >= 0 && key.size() > 4) {
          std::int32_t o = intern(key.substr(4));
          idx.state_k[o][s] = static_cast<std::int32_t>(k);
          ok = true;
        }
      } else if (key.size() >= 5 && key[0] == 't' && key[1] == ':' && key[3] == '>') {
        int p = label_index(key[2]);
        int c = label_index(key[4]);
        if (p >= 0 && c >= 0) {
          if (key.size() == 5) {
            idx.pure_k[p * 3 + c] = static_cast<std::int32_t>(k);
            ok = true;
          } else if (key[5] == ':' && key.size() > 6) {
            std::int32_t o = intern(key.substr(6));
            idx.trans_k[o][p * 3 + c] = static_cast<std::int32_t>(k);
            ok = true;
          }
        }
      }
      if (!ok) throw ParseError("malformed feature key '" + key + "'");
    }
    return idx;
  }
};

// Per-sentence observation ids, one list per position; unknown observation
// strings are dropped (they carry no weight anyway).
using ResolvedFeatures = std::vector<std::vector<std::int32_t>>;

inline ResolvedFeatures resolve_features(const ParamIndex& idx,
                                         const PositionFeatures& feats) {
  ResolvedFeatures out(feats.size());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    out[i].reserve(feats[i].size());
    for (const std::string& obs : feats[i]) {
      auto it = idx.obs_id.find(obs);
      if (it != idx.obs_id.end()) out[i].push_back(it->second);
    }
  }
  return out;
}

inline double state_score(const ParamIndex& idx, const std::vector<double>& w,
                          const std::vector<std::int32_t>& obs, int label) {
  double v = 0.0;
  for (std::int32_t o : obs) {
    std::int32_t k = idx.state_k[o][label];
    if (k >= 0) v += w[k];
  }
  return v;
}

inline double trans_score(const ParamIndex& idx, const std::vector<double>& w,
                          const std::vector<std::int32_t>& obs, int prev, int cur) {
  double v = 0.0;
  int pc = prev * 3 + cur;
  for (std::int32_t o : obs) {
    std::int32_t k = idx.trans_k[o][pc];
    if (k >= 0) v += w[k];
  }
  std::int32_t k = idx.pure_k[pc];
  if (k >= 0) v += w[k];
  return v;
}

inline double logsumexp3(double a, double b, double c) {
  double m = std::max(a, std::max(b, c));
  if (m == kNegInf) return kNegInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m) + std::exp(c - m));
}

// Node potentials S[i][s] and edge potentials E[i][prev*3+cur] (i >= 1).
struct Potentials {
  std::vector<std::array<double, 3>> node;
  std::vector<std::array<double, 9>> edge;
};

inline Potentials compute_potentials(const ParamIndex& idx,
                                     const std::vector<double>& w,
                                     const ResolvedFeatures& feats) {
  std::size_t n = feats.size();
  Potentials pot;
  pot.node.resize(n);
  pot.edge.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int s = 0; s < 3; ++s) pot.node[i][s] = state_score(idx, w, feats[i], s);
    if (i > 0)
      for (int p = 0; p < 3; ++p)
        for (int c = 0; c < 3; ++c)
          pot.edge[i][p * 3 + c] = trans_score(idx, w, feats[i], p, c);
  }
  return pot;
}

inline std::vector<std::array<double, 3>> forward(const Potentials& pot) {
  std::size_t n = pot.node.size();
  std::vector<std::array<double, 3>> alpha(n);
  for (int s = 0; s < 3; ++s) alpha[0][s] = pot.node[0][s];
  for (std::size_t i = 1; i < n; ++i)
    for (int c = 0; c < 3; ++c) {
      std::array<double, 3> terms;
      for (int p = 0; p < 3; ++p)
        terms[p] = alpha[i - 1][p] + (pot.node[i][c] + pot.edge[i][p * 3 + c]);
      alpha[i][c] = logsumexp3(terms[0], terms[1], terms[2]);
    }
  return alpha;
}

inline std::vector<std::array<double, 3>> backward(const Potentials& pot) {
  std::size_t n = pot.node.size();
  std::vector<std::array<double, 3>> beta(n);
  beta[n - 1] = {0.0, 0.0, 0.0};
  for (std::size_t i = n - 1; i > 0; --i)
    for (int p = 0; p < 3; ++p) {
      std::array<double, 3> terms;
      for (int c = 0; c < 3; ++c)
        terms[c] = (pot.node[i][c] + pot.edge[i][p * 3 + c]) + beta[i][c];
      beta[i - 1][p] = logsumexp3(terms[0], terms[1], terms[2]);
    }
  return beta;
}

}  // namespace detail

struct TrainConfig {
  double l2_sigma = 10.0;
  int max_iterations = 200;
  double gradient_tolerance = 1e-4;
  // Kept for interface stability; optimization starts from zero weights and is
  // fully deterministic, so the seed currently influences nothing.
  std::uint64_t seed = 1;

  void validate() const {
    if (!(l2_sigma > 0)) throw ConfigError("l2_sigma must be > 0");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (!(gradient_tolerance > 0)) throw ConfigError("gradient_tolerance must be > 0");
  }
};

class CrfModel {
 public:
  CrfModel(TemplateSet templates, EntropyTable entropies, FeatureDictionary dict,
           std::vector<double> weights)
      : templates_(std::move(templates)),
        entropies_(std::move(entropies)),
        dict_(std::move(dict)),
        weights_(std::move(weights)) {
    if (weights_.size() != dict_.size())
      throw ContractError("weight vector length " + std::to_string(weights_.size()) +
                          " does not match dictionary size " +
                          std::to_string(dict_.size()));
    for (double w : weights_)
      if (!std::isfinite(w)) throw ContractError("non-finite weight in model");
    if (!dict_.frozen()) throw ContractError("model dictionary must be frozen");
    params_ = detail::ParamIndex::build(dict_);
  }

  const TemplateSet& templates() const { return templates_; }
  const EntropyTable& entropies() const { return entropies_; }
  const FeatureDictionary& dictionary() const { return dict_; }
  const std::vector<double>& weights() const { return weights_; }
  const detail::ParamIndex& params() const { return params_; }

  PositionFeatures features_for(const Sentence& sentence) const {
    return extract_sentence_features(sentence, templates_, entropies_);
  }

 private:
  TemplateSet templates_;
  EntropyTable entropies_;
  FeatureDictionary dict_;
  std::vector<double> weights_;
  detail::ParamIndex params_;
};

// ---------------------------------------------------------------------------
// Scoring and inference

inline double score_sequence(const CrfModel& model, const Sentence& sentence,
                             const LabelSequence& labels,
                             const PositionFeatures& feats) {
  if (labels.size() != sentence.size() || feats.size() != sentence.size())
    throw ContractError("labels/features length does not match sentence");
  auto resolved = detail::resolve_features(model.params(), feats);
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int cur = static_cast<int>(labels[i]);
    total += detail::state_score(model.params(), model.weights(), resolved[i], cur);
    if (i > 0) {
      int prev = static_cast<int>(labels[i - 1]);
      total +=
          detail::trans_score(model.params(), model.weights(), resolved[i], prev, cur);
    }
  }
  return total;
}

inline double log_partition(const CrfModel& model, const Sentence& sentence,
                            const PositionFeatures& feats) {
  if (sentence.size() == 0) throw ContractError("empty sentence");
  auto resolved = detail::resolve_features(model.params(), feats);
  auto pot = detail::compute_potentials(model.params(), model.weights(), resolved);
  auto alpha = detail::forward(pot);
  const auto& last = alpha.back();
  return detail::logsumexp3(last[0], last[1], last[2]);
}

inline double sequence_probability(const CrfModel& model, const Sentence& sentence,
                                   const LabelSequence& labels,
                                   const PositionFeatures& feats) {
  double s = score_sequence(model, sentence, labels, feats);
  double z = log_partition(model, sentence, feats);
  return std::exp(s - z);
}

// Expected feature counts under the model distribution, one entry per
// dictionary index. Computed with forward-backward node and edge marginals.
inline std::vector<double> expectations(const CrfModel& model,
                                        const Sentence& sentence,
                                        const PositionFeatures& feats) {
  if (sentence.size() == 0) throw ContractError("empty sentence");
  const auto& idx = model.params();
  auto resolved = detail::resolve_features(idx, feats);
  auto pot = detail::compute_potentials(idx, model.weights(), resolved);
  auto alpha = detail::forward(pot);
  auto beta = detail::backward(pot);
  double logz = detail::logsumexp3(alpha.back()[0], alpha.back()[1], alpha.back()[2]);

  std::vector<double> expected(model.dictionary().size(), 0.0);
  std::size_t n = sentence.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (int s = 0; s < 3; ++s) {
      double marg = std::exp(alpha[i][s] + beta[i][s] - logz);
      for (std::int32_t o : resolved[i]) {
        std::int32_t k = idx.state_k[o][s];
        if (k >= 0) expected[k] += marg;
      }
    }
    if (i == 0) continue;
    for (int p = 0; p < 3; ++p)
      for (int c = 0; c < 3; ++c) {
        double marg = std::exp(alpha[i - 1][p] + pot.node[i][c] +
                               pot.edge[i][p * 3 + c] + beta[i][c] - logz);
        for (std::int32_t o : resolved[i]) {
          std::int32_t k = idx.trans_k[o][p * 3 + c];
          if (k >= 0) expected[k] += marg;
        }
        std::int32_t k = idx.pure_k[p * 3 + c];
        if (k >= 0) expected[k] += marg;
      }
  }
  return expected;
}

// Max-score labeling under the hard BIO constraints: I may not start a
// sentence and may not follow O. Score ties are broken toward the smaller
// label in the order B < I < O, both per backpointer and at the final cell.
inline LabelSequence viterbi_decode(const CrfModel& model, const Sentence& sentence,
                                    const PositionFeatures& feats) {
  if (sentence.size() == 0) throw ContractError("empty sentence");
  const auto& idx = model.params();
  auto resolved = detail::resolve_features(idx, feats);
  auto pot = detail::compute_potentials(idx, model.weights(), resolved);
  std::size_t n = sentence.size();
  std::vector<std::array<double, 3>> delta(n);
  std::vector<std::array<int, 3>> back(n);
  for (int s = 0; s < 3; ++s) {
    delta[0][s] = s == static_cast<int>(Label::I) ? detail::kNegInf : pot.node[0][s];
    back[0][s] = -1;
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      double best = detail::kNegInf;
      int arg = -1;
      for (int p = 0; p < 3; ++p) {
        bool forbidden = c == static_cast<int>(Label::I) &&
                         p == static_cast<int>(Label::O);
        if (forbidden || delta[i - 1][p] == detail::kNegInf) continue;
        double v = (delta[i - 1][p] + pot.node[i][c]) + pot.edge[i][p * 3 + c];
        if (v > best) {
          best = v;
          arg = p;
        }
      }
      delta[i][c] = best;
      back[i][c] = arg;
    }
  }
  int cur = 0;
  double best = delta[n - 1][0];
  for (int s = 1; s < 3; ++s)
    if (delta[n - 1][s] > best) {
      best = delta[n - 1][s];
      cur = s;
    }
  LabelSequence labels(n);
  for (std::size_t i = n; i-- > 0;) {
    labels[i] = static_cast<Label>(cur);
    cur = back[i][cur];
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Training

// Parameter dictionary for a trained model: the nine pure label-bigram
// transitions first (so the model can learn the BIO grammar even for bigrams
// absent from the gold data), then every observed state and transition
// pairing in corpus order.
inline FeatureDictionary build_parameter_dictionary(const Corpus& corpus,
                                                    const TemplateSet& templates,
                                                    const EntropyTable& entropies) {
  FeatureDictionary dict;
  for (Label p : kLabels)
    for (Label c : kLabels) dict.add(transition_feature_key(p, c));
  detail::scan_observed_pairings(dict, corpus, templates, entropies);
  dict.freeze();
  return dict;
}

namespace detail {

struct TrainProblem {
  const ParamIndex* idx;
  std::size_t dim;
  double sigma;
  std::vector<ResolvedFeatures> sentences;
  std::vector<LabelSequence> gold;
  std::vector<double> empirical;

  static TrainProblem build(const ParamIndex& idx, std::size_t dim,
                            const Corpus& corpus, const TemplateSet& templates,
                            const EntropyTable& entropies, double sigma) {
    if (!corpus.has_gold()) throw ContractError("training requires gold labels");
    TrainProblem prob;
    prob.idx = &idx;
    prob.dim = dim;
    prob.sigma = sigma;
    prob.empirical.assign(dim, 0.0);
    for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
      const Sentence& sent = corpus.sentences[si];
      if (sent.size() == 0) throw ContractError("empty sentence in training corpus");
      auto feats = extract_sentence_features(sent, templates, entropies);
      prob.sentences.push_back(resolve_features(idx, feats));
      prob.gold.push_back(corpus.gold[si]);
      const LabelSequence& g = corpus.gold[si];
      const ResolvedFeatures& rf = prob.sentences.back();
      for (std::size_t i = 0; i < sent.size(); ++i) {
        int cur = static_cast<int>(g[i]);
        for (std::int32_t o : rf[i]) {
          std::int32_t k = idx.state_k[o][cur];
          if (k >= 0) prob.empirical[k] += 1.0;
        }
        if (i > 0) {
          int prev = static_cast<int>(g[i - 1]);
          for (std::int32_t o : rf[i]) {
            std::int32_t k = idx.trans_k[o][prev * 3 + cur];
            if (k >= 0) prob.empirical[k] += 1.0;
          }
          std::int32_t k = idx.pure_k[prev * 3 + cur];
          if (k >= 0) prob.empirical[k] += 1.0;
        }
      }
    }
    return prob;
  }

  // Penalized log-likelihood and its gradient at w.
  double evaluate(const std::vector<double>& w, std::vector<double>& grad) const {
    grad.assign(dim, 0.0);
    double obj = 0.0;
    for (std::size_t si = 0; si < sentences.size(); ++si) {
      const ResolvedFeatures& rf = sentences[si];
      const LabelSequence& g = gold[si];
      std::size_t n = rf.size();
      auto pot = compute_potentials(*idx, w, rf);
      auto alpha = forward(pot);
      auto beta = backward(pot);
      double logz = logsumexp3(alpha[n - 1][0], alpha[n - 1][1], alpha[n - 1][2]);

      double gold_score = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        gold_score += pot.node[i][static_cast<int>(g[i])];
        if (i > 0)
          gold_score +=
              pot.edge[i][static_cast<int>(g[i - 1]) * 3 + static_cast<int>(g[i])];
      }
      obj += gold_score - logz;

      for (std::size_t i = 0; i < n; ++i) {
        for (int s = 0; s < 3; ++s) {
          double marg = std::exp(alpha[i][s] + beta[i][s] - logz);
          for (std::int32_t o : rf[i]) {
            std::int32_t k = idx->state_k[o][s];
            if (k >= 0) grad[k] -= marg;
          }
        }
        if (i == 0) continue;
        for (int p = 0; p < 3; ++p)
          for (int c = 0; c < 3; ++c) {
            double marg = std::exp(alpha[i - 1][p] + pot.node[i][c] +
                                   pot.edge[i][p * 3 + c] + beta[i][c] - logz);
            for (std::int32_t o : rf[i]) {
              std::int32_t k = idx->trans_k[o][p * 3 + c];
              if (k >= 0) grad[k] -= marg;
            }
            std::int32_t k = idx->pure_k[p * 3 + c];
            if (k >= 0) grad[k] -= marg;
          }
      }
    }
    double penalty = 0.0;
    double s2 = sigma * sigma;
    for (std::size_t k = 0; k < dim; ++k) {
      penalty += w[k] * w[k];
      grad[k] += empirical[k] - w[k] / s2;
    }
    obj -= penalty / (2.0 * s2);
    return obj;
  }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double v = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * b[i];
  return v;
}

inline double inf_norm(const std::vector<double>& a) {
  double v = 0.0;
  for (double x : a) v = std::max(v, std::abs(x));
  return v;
}

}  // namespace detail

// Objective and gradient of the penalized log-likelihood at the model's
// current weights, evaluated on a labeled corpus.
inline std::pair<double, std::vector<double>> objective_and_gradient(
    const CrfModel& model, const Corpus& corpus, const TrainConfig& config) {
  config.validate();
  auto prob =
      detail::TrainProblem::build(model.params(), model.dictionary().size(), corpus,
                                  model.templates(), model.entropies(),
                                  config.l2_sigma);
  std::vector<double> grad;
  double obj = prob.evaluate(model.weights(), grad);
  return {obj, std::move(grad)};
}

// Deterministic batch trainer: L-BFGS direction (history 8) with Armijo
// backtracking, zero initialization, stopping on gradient infinity norm or the
// iteration cap. The accepted objective never decreases.
inline CrfModel train(const Corpus& corpus, const TemplateSet& templates,
                      const EntropyTable& entropies, const TrainConfig& config) {
  config.validate();
  if (corpus.sentences.empty()) throw ContractError("empty training corpus");
  FeatureDictionary dict = build_parameter_dictionary(corpus, templates, entropies);
  auto idx = detail::ParamIndex::build(dict);
  auto prob = detail::TrainProblem::build(idx, dict.size(), corpus, templates,
                                          entropies, config.l2_sigma);

  std::size_t dim = dict.size();
  std::vector<double> w(dim, 0.0), grad(dim), new_grad(dim);
  double obj = prob.evaluate(w, grad);
  if (!std::isfinite(obj)) throw NumericError("non-finite objective at iteration 0");

  constexpr std::size_t kHistory = 8;
  std::vector<std::vector<double>> hist_s, hist_y;
  std::vector<double> hist_rho;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    if (detail::inf_norm(grad) < config.gradient_tolerance) break;

    // Two-loop recursion on the ascent problem.
    std::vector<double> dir = grad;
    std::vector<double> a(hist_s.size());
    for (std::size_t h = hist_s.size(); h-- > 0;) {
      a[h] = hist_rho[h] * detail::dot(hist_s[h], dir);
      for (std::size_t k = 0; k < dim; ++k) dir[k] -= a[h] * hist_y[h][k];
    }
    if (!hist_s.empty()) {
      double yy = detail::dot(hist_y.back(), hist_y.back());
      double sy = 1.0 / hist_rho.back();
      if (yy > 0) {
        double scale = sy / yy;
        for (double& d : dir) d *= scale;
      }
    }
    for (std::size_t h = 0; h < hist_s.size(); ++h) {
      double b = hist_rho[h] * detail::dot(hist_y[h], dir);
      for (std::size_t k = 0; k < dim; ++k) dir[k] += (a[h] - b) * hist_s[h][k];
    }
    double slope = detail::dot(grad, dir);
    if (!(slope > 0)) {  // not an ascent direction; fall back to the gradient
      dir = grad;
      slope = detail::dot(grad, grad);
    }

    double step = hist_s.empty() ? 1.0 / std::max(1.0, std::sqrt(slope)) : 1.0;
    constexpr double kArmijo = 1e-4;
    double new_obj = detail::kNegInf;
    std::vector<double> new_w(dim);
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      for (std::size_t k = 0; k < dim; ++k) new_w[k] = w[k] + step * dir[k];
      new_obj = prob.evaluate(new_w, new_grad);
      if (std::isfinite(new_obj) && new_obj >= obj + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no improving step representable; treat as converged
    if (!std::isfinite(new_obj))
      throw NumericError("non-finite objective at iteration " + std::to_string(iter));

    std::vector<double> s(dim), y(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      s[k] = new_w[k] - w[k];
      y[k] = grad[k] - new_grad[k];  // ascent convention: y is the neg. curvature pair
    }
    double sy = detail::dot(s, y);
    if (sy > 1e-10) {
      hist_s.push_back(std::move(s));
      hist_y.push_back(std::move(y));
      hist_rho.push_back(1.0 / sy);
      if (hist_s.size() > kHistory) {
        hist_s.erase(hist_s.begin());
        hist_y.erase(hist_y.begin());
        hist_rho.erase(hist_rho.begin());
      }
    }
    w.swap(new_w);
    grad.swap(new_grad);
    obj = new_obj;
  }

  return CrfModel(templates, entropies, std::move(dict), std::move(w));
}

// ---------------------------------------------------------------------------
// Model file: a versioned text format. Header lines, the template list, then
// the entropy table and the weighted features as counted inline sections.
// Weights and entropies are printed as shortest round-trippable decimals so a
// save/load cycle reproduces the model exactly.

inline std::string model_to_string(const CrfModel& model) {
  std::string out = "version=1\nlabels=B,I,O\ntemplates=";
  out += model.templates().fingerprint;
  out += '\n';
  for (const auto& t : model.templates().templates) {
    out += t.serialize();
    out += '\n';
  }
  out += "entropies=" + std::to_string(model.entropies().words.size()) + "\n";
  out += entropy_table_to_string(model.entropies(), /*shortest=*/true);
  out += "features=" + std::to_string(model.dictionary().size()) + "\n";
  for (std::size_t k = 0; k < model.dictionary().size(); ++k) {
    out += model.dictionary().at(k);
    out += '\t';
    out += format_double(model.weights()[k]);
    out += '\n';
  }
  return out;
}

inline void save_model(const CrfModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << model_to_string(model);
}

inline CrfModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  const std::string file = path.string();
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw ParseError(file, line_no, "unexpected end of file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  next_line();
  if (line != "version=1") throw ParseError(file, line_no, "unsupported model version");
  next_line();
  if (line != "labels=B,I,O") throw ParseError(file, line_no, "unsupported label set");
  next_line();
  if (!line.starts_with("templates="))
    throw ParseError(file, line_no, "missing template fingerprint");
  std::string fingerprint = line.substr(10);

  std::vector<FeatureTemplate> tpls;
  while (true) {
    next_line();
    if (line.starts_with("entropies=")) break;
    auto sep = line.find(':');
    if (sep == std::string::npos)
      throw ParseError(file, line_no, "malformed template line '" + line + "'");
    TemplateKind kind;
    if (!template_kind_from_name(line.substr(0, sep), kind))
      throw ParseError(file, line_no, "unknown template kind '" + line.substr(0, sep) + "'");
    FeatureTemplate t{kind, {}};
    for (auto part : split(std::string_view(line).substr(sep + 1), ',')) {
      // offset_str writes an explicit sign on positive offsets
      if (!part.empty() && part.front() == '+') part.remove_prefix(1);
      t.offsets.push_back(static_cast<int>(parse_int(part, "template offset")));
    }
    if (t.offsets.empty() || t.offsets.size() > 2)
      throw ParseError(file, line_no, "template must have 1 or 2 offsets");
    tpls.push_back(std::move(t));
  }
  TemplateSet templates = TemplateSet::make(std::move(tpls));
  if (templates.fingerprint != fingerprint)
    throw ParseError(file, line_no,
                     "template fingerprint mismatch (file says " + fingerprint +
                         ", templates hash to " + templates.fingerprint + ")");

  auto count = static_cast<std::size_t>(parse_int(line.substr(10), "entropy count"));
  EntropyTable entropies;
  for (std::size_t i = 0; i < count; ++i) {
    next_line();
    parse_entropy_line(entropies, line, file, line_no);
  }
  entropies.recompute_bounds();

  next_line();
  if (!line.starts_with("features="))
    throw ParseError(file, line_no, "missing feature count");
  count = static_cast<std::size_t>(parse_int(line.substr(9), "feature count"));
  FeatureDictionary dict;
  std::vector<double> weights;
  weights.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    next_line();
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(file, line_no, "malformed feature line");
    std::string key = line.substr(0, tab);
    if (dict.lookup(key) >= 0)
      throw ParseError(file, line_no, "duplicate feature '" + key + "'");
    dict.add(key);
    double wv = parse_double(std::string_view(line).substr(tab + 1), "weight");
    if (!std::isfinite(wv)) throw ParseError(file, line_no, "non-finite weight");
    weights.push_back(wv);
  }
  dict.freeze();
  return CrfModel(std::move(templates), std::move(entropies), std::move(dict),
                  std::move(weights));
}

}  // namespace hypotax
