#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "debunk/lm.hpp"

namespace debunk {

/// Word n-gram scorer trained by counting over the grounding evidence.
///
/// Kneser-Ney smoothing is interpolated with one absolute discount per order,
/// D = n1 / (n1 + 2 n2) from that order's count-of-counts. The highest order
/// uses raw counts, lower orders use continuation counts, and the unigram
/// level interpolates with the uniform distribution. An order whose
/// count-of-counts cannot support the discount estimate (n1 == 0 or n2 == 0)
/// falls back to add-k toward the next lower order:
///   p(w | h) = (c(h w) + k |V| p_lower(w | h')) / (c(h) + k |V|).
/// With Smoothing::AddK the model is plain add-k over the highest order.
///
/// Every sequence is padded with order-1 start markers that are conditioned
/// on but never predicted. Tokens unseen during grounding map to a reserved
/// unknown type, which is part of the vocabulary V.
class NgramScorer final : public Scorer, public ConditionalModel {
 public:
  static constexpr const char* kUnknownToken = "<unk>";

  NgramScorer() = default;

  ScorerKind kind() const override { return ScorerKind::Ngram; }
  bool grounded() const override { return grounded_; }
  void ground(std::span<const std::string> evidence, const GroundingConfig& cfg) override;
  double perplexity(std::string_view text) const override;
  double sequence_log_prob(const TokenSequence& seq) const override;
  void reset() override;
  std::string perplexity_unit() const override { return "word"; }

  double log_prob(std::span<const std::string> history, const std::string& token) const override;
  double probability(std::span<const std::string> history, const std::string& token) const;

  /// Predictable types: every grounded token plus kUnknownToken.
  std::vector<std::string> vocabulary() const;
  std::size_t vocabulary_size() const { return id_to_token_.size() - 1; }
  const GroundingConfig& config() const { return cfg_; }

  /// Discount used at `order` (1-based), or a negative value when that order
  /// fell back to add-k.
  double discount(int order) const;

 private:
  using Id = std::uint32_t;
  using Context = std::vector<Id>;

  struct ContextHash {
    std::size_t operator()(const Context& c) const noexcept;
  };

  struct ContextStats {
    std::unordered_map<Id, std::uint64_t> counts;
    std::uint64_t total = 0;
  };

  using Table = std::unordered_map<Context, ContextStats, ContextHash>;

  void require_grounded() const;
  Id lookup(const std::string& token) const;
  double probability_ids(const Context& padded_history, Id word, int order) const;

  GroundingConfig cfg_;
  bool grounded_ = false;
  std::unordered_map<std::string, Id> token_to_id_;
  std::vector<std::string> id_to_token_;
  std::vector<Table> tables_;       // tables_[m] for order m (index 0 unused)
  std::vector<double> discounts_;   // < 0 marks an add-k order
};

}  // namespace debunk
