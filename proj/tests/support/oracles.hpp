#pragma once

// Independent reference computations the library is checked against.

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "debunk/data_model.hpp"
#include "debunk/metrics.hpp"
#include "debunk/retrieval.hpp"
#include "debunk/text.hpp"

namespace oracles {

struct Hit {
  std::size_t sentence;
  double score;
};

// Dense TF-IDF cosine over every sentence, recomputed from scratch per query.
inline std::vector<Hit> brute_force_top_k(const std::vector<debunk::SentenceUnit>& sentences, const std::string& query,
                                          std::size_t k, const debunk::text::TermOptions& opts = {}) {
  std::vector<std::map<std::string, double>> tf(sentences.size());
  std::map<std::string, double> df;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (const std::string& t : debunk::text::terms(sentences[i].text, opts)) tf[i][t] += 1.0;
    for (const auto& [t, c] : tf[i]) df[t] += 1.0;
  }
  const double n = static_cast<double>(sentences.size());
  auto idf = [&](const std::string& t) { return std::log((1.0 + n) / (1.0 + df.at(t))) + 1.0; };

  std::map<std::string, double> q;
  for (const std::string& t : debunk::text::terms(query, opts))
    if (df.count(t)) q[t] += 1.0;
  double qnorm = 0.0;
  for (auto& [t, w] : q) {
    w *= idf(t);
    qnorm += w * w;
  }
  qnorm = std::sqrt(qnorm);

  std::vector<Hit> hits;
  if (qnorm == 0.0) return hits;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    double dot = 0.0, dnorm = 0.0;
    for (const auto& [t, c] : tf[i]) {
      const double w = c * idf(t);
      dnorm += w * w;
      auto it = q.find(t);
      if (it != q.end()) dot += w * it->second;
    }
    if (dot > 0.0) hits.push_back(Hit{i, dot / (std::sqrt(dnorm) * qnorm)});
  }
  std::sort(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) {
    const long long ka = std::llround(a.score * 1e12), kb = std::llround(b.score * 1e12);
    if (ka != kb) return ka > kb;
    if (sentences[a.sentence].doc_id != sentences[b.sentence].doc_id)
      return sentences[a.sentence].doc_id < sentences[b.sentence].doc_id;
    return sentences[a.sentence].sent_index < sentences[b.sentence].sent_index;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

struct Recount {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Confusion counts by direct tally, False as positive.
inline Recount recount(const std::vector<debunk::Label>& predicted, const std::vector<debunk::Label>& gold) {
  Recount r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predicted[i] == debunk::Label::False;
    const bool g = gold[i] == debunk::Label::False;
    if (p && g) ++r.tp;
    else if (p && !g) ++r.fp;
    else if (!p && !g) ++r.tn;
    else ++r.fn;
  }
  return r;
}

inline double f1(double tp, double fp, double fn) {
  const double denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2 * tp / denom;
}

}  // namespace oracles
