#include "debunk/lm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "debunk/error.hpp"
#include "debunk/log.hpp"
#include "debunk/text.hpp"

namespace debunk {

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq{text::lm_tokens(text)};
  if (seq.tokens.empty()) throw DataError("text contains no tokens");
  return seq;
}

std::string_view to_string(Smoothing s) { return s == Smoothing::AddK ? "add_k" : "kneser_ney"; }

Smoothing parse_smoothing(std::string_view s) {
  if (s == "add_k") return Smoothing::AddK;
  if (s == "kneser_ney") return Smoothing::KneserNey;
  throw ConfigError("unknown smoothing \"" + std::string(s) + "\" (expected add_k or kneser_ney)");
}

void GroundingConfig::validate() const {
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (ngram_order < 1) throw ConfigError("ngram_order must be at least 1");
  if (!(add_k > 0.0)) throw ConfigError("add_k must be positive");
  if (std::find(kExploredEpochs.begin(), kExploredEpochs.end(), epochs) == kExploredEpochs.end())
    log_notice("epochs=" + std::to_string(epochs) + " is outside the explored grid {1,2,3,5,10,20}");
}

nlohmann::json to_json(const GroundingConfig& cfg) {
  return nlohmann::json{{"epochs", cfg.epochs},
                        {"learning_rate", cfg.learning_rate},
                        {"ngram_order", cfg.ngram_order},
                        {"smoothing", std::string(to_string(cfg.smoothing))},
                        {"add_k", cfg.add_k}};
}

GroundingConfig grounding_config_from_json(const nlohmann::json& j) {
  GroundingConfig cfg;
  try {
    if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<int>();
    if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("ngram_order")) cfg.ngram_order = j.at("ngram_order").get<int>();
    if (j.contains("smoothing")) cfg.smoothing = parse_smoothing(j.at("smoothing").get<std::string>());
    if (j.contains("add_k")) cfg.add_k = j.at("add_k").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid grounding config: ") + e.what());
  }
  return cfg;
}

double sequence_log_prob(const ConditionalModel& model, const TokenSequence& seq) {
  double total = 0.0;
  const std::span<const std::string> tokens(seq.tokens);
  for (std::size_t i = 0; i < tokens.size(); ++i) total += model.log_prob(tokens.first(i), tokens[i]);
  return total;
}

double perplexity_from_log_prob(double log_prob, std::size_t n) {
  if (n == 0) throw std::invalid_argument("perplexity of an empty sequence");
  return std::exp(-log_prob / static_cast<double>(n));
}

double perplexity(const ConditionalModel& model, const TokenSequence& seq) {
  return perplexity_from_log_prob(sequence_log_prob(model, seq), seq.size());
}

UniformModel::UniformModel(std::size_t vocabulary_size) {
  if (vocabulary_size == 0) throw std::invalid_argument("uniform model needs a non-empty vocabulary");
  log_p_ = -std::log(static_cast<double>(vocabulary_size));
}

double UniformModel::log_prob(std::span<const std::string>, const std::string&) const { return log_p_; }

std::string_view to_string(ScorerKind kind) { return kind == ScorerKind::Ngram ? "ngram" : "external"; }

ScorerKind parse_scorer_kind(std::string_view s) {
  if (s == "ngram") return ScorerKind::Ngram;
  if (s == "external") return ScorerKind::External;
  throw ConfigError("unknown scorer \"" + std::string(s) + "\" (expected ngram or external)");
}

}  // namespace debunk
