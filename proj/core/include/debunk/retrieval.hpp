#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "debunk/data_model.hpp"
#include "debunk/text.hpp"

namespace debunk {

struct ScoredCandidate {
  SentenceUnit sentence;
  double score = 0.0;

  bool operator==(const ScoredCandidate&) const = default;
};

nlohmann::json to_json(const ScoredCandidate& candidate);
ScoredCandidate candidate_from_json(const nlohmann::json& j);

/// Anything that can rank corpus sentences against a claim. Implementations
/// must return at most k candidates in descending score order.
class EvidenceExtractor {
 public:
  virtual ~EvidenceExtractor() = default;
  virtual std::vector<ScoredCandidate> top_candidates(std::string_view claim_text, std::size_t k) const = 0;
};

/// Sentence-level TF-IDF index with smoothed idf
///   idf(t) = ln((1 + N) / (1 + df(t))) + 1
/// raw term frequency and L2-normalized vectors; relevance is cosine
/// similarity. Query terms absent from the vocabulary are dropped. Immutable
/// once built, so queries may run concurrently.
class TfIdfIndex final : public EvidenceExtractor {
 public:
  using TermId = std::uint32_t;

  struct Posting {
    std::uint32_t sentence;
    std::uint32_t tf;

    bool operator==(const Posting&) const = default;
  };

  static constexpr int kFormatVersion = 1;

  /// Throws DataError when no sentence contributes a term.
  static TfIdfIndex build(std::vector<SentenceUnit> sentences, text::TermOptions options = {});

  std::vector<ScoredCandidate> top_candidates(std::string_view claim_text, std::size_t k = 10) const override;

  /// Cosine similarity between the claim and every sentence with a nonzero
  /// score, unsorted.
  std::vector<std::pair<std::uint32_t, double>> score_all(std::string_view claim_text) const;

  std::size_t sentence_count() const { return sentences_.size(); }
  std::size_t vocabulary_size() const { return terms_.size(); }
  const std::vector<SentenceUnit>& sentences() const { return sentences_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }
  const std::vector<std::vector<Posting>>& postings() const { return postings_; }
  const std::vector<double>& sentence_norms() const { return norms_; }
  const text::TermOptions& term_options() const { return options_; }

  /// Term id, or -1 when the term is not indexed.
  long long term_id(std::string_view term) const;

  /// Field order: format, version, options, sentences, terms, idf, postings
  /// ([sentence, tf] pairs per term id), sentence_norms.
  nlohmann::ordered_json to_json() const;
  static TfIdfIndex from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static TfIdfIndex load(const std::filesystem::path& path);

 private:
  TfIdfIndex() = default;

  std::vector<SentenceUnit> sentences_;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> vocabulary_;
  std::vector<double> idf_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<double> norms_;
  text::TermOptions options_;
};

/// Sort key shared by every ranking in the library: descending score, then
/// (doc_id, sent_index) ascending. Scores are compared after rounding to
/// 1e-12 so mathematically tied candidates stay tied under floating-point
/// summation noise.
bool ranks_before(const ScoredCandidate& a, const ScoredCandidate& b);

}  // namespace debunk
