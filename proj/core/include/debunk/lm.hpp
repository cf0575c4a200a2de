#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace debunk {

struct TokenSequence {
  std::vector<std::string> tokens;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const TokenSequence&) const = default;
};

/// Canonical tokenizer for every language model in the library: lowercased
/// word and punctuation tokens (see text::lm_tokens). Throws DataError when
/// the text contains no token.
TokenSequence tokenize(std::string_view text);

enum class Smoothing { AddK, KneserNey };

std::string_view to_string(Smoothing s);
Smoothing parse_smoothing(std::string_view s);

/// Epoch counts explored when grounding on evidence; others are accepted
/// with a notice.
inline constexpr std::array<int, 6> kExploredEpochs = {1, 2, 3, 5, 10, 20};

struct GroundingConfig {
  int epochs = 5;
  double learning_rate = 5e-5;
  int ngram_order = 3;
  Smoothing smoothing = Smoothing::KneserNey;
  double add_k = 0.1;

  /// Throws ConfigError for non-positive values; logs a notice for an epoch
  /// count outside kExploredEpochs.
  void validate() const;

  bool operator==(const GroundingConfig&) const = default;
};

nlohmann::json to_json(const GroundingConfig& cfg);
GroundingConfig grounding_config_from_json(const nlohmann::json& j);

/// A model of p(token | preceding tokens).
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  /// Natural-log probability of `token` given the preceding tokens of the
  /// same sequence. `history` never contains start padding.
  virtual double log_prob(std::span<const std::string> history, const std::string& token) const = 0;
};

/// Chain rule: sum over i of ln p(x_i | x_0 .. x_{i-1}).
double sequence_log_prob(const ConditionalModel& model, const TokenSequence& seq);

/// exp(-log_prob / n). Throws std::invalid_argument for n == 0.
double perplexity_from_log_prob(double log_prob, std::size_t n);

double perplexity(const ConditionalModel& model, const TokenSequence& seq);

/// Every token has probability 1/V regardless of history.
class UniformModel final : public ConditionalModel {
 public:
  explicit UniformModel(std::size_t vocabulary_size);
  double log_prob(std::span<const std::string> history, const std::string& token) const override;

 private:
  double log_p_;
};

enum class ScorerKind { Ngram, External };

std::string_view to_string(ScorerKind kind);
ScorerKind parse_scorer_kind(std::string_view s);

/// A language model that can be grounded on evidence text and then asked for
/// perplexities. Grounding only ever sees evidence: claims and labels are not
/// part of this interface.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual ScorerKind kind() const = 0;
  virtual bool grounded() const = 0;

  /// Replaces any previous grounding. Throws DataError on empty evidence.
  virtual void ground(std::span<const std::string> evidence, const GroundingConfig& cfg) = 0;

  /// Throws NotGroundedError before ground() has succeeded.
  virtual double perplexity(std::string_view text) const = 0;

  /// Throws NotGroundedError before ground(); scorers that only report
  /// perplexity throw Error.
  virtual double sequence_log_prob(const TokenSequence& seq) const = 0;

  /// Back to the ungrounded state.
  virtual void reset() = 0;

  /// Unit the perplexity is normalized over, e.g. "word" or "subword".
  virtual std::string perplexity_unit() const = 0;
};

}  // namespace debunk
