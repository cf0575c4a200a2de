#include "debunk/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "debunk/error.hpp"
#include "debunk/text.hpp"

namespace debunk {
namespace {

constexpr std::uint32_t kUnknownId = 0;
constexpr std::uint32_t kStartId = 1;

}  // namespace

std::size_t NgramScorer::ContextHash::operator()(const Context& c) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (Id id : c) {
    h ^= id;
    h *= 1099511628211ull;
  }
  return h;
}

void NgramScorer::reset() {
  grounded_ = false;
  token_to_id_.clear();
  id_to_token_.clear();
  tables_.clear();
  discounts_.clear();
}

void NgramScorer::ground(std::span<const std::string> evidence, const GroundingConfig& cfg) {
  cfg.validate();
  if (evidence.empty()) throw DataError("cannot ground on an empty evidence list");
  reset();
  cfg_ = cfg;

  id_to_token_ = {kUnknownToken, "<s>"};
  token_to_id_ = {{kUnknownToken, kUnknownId}, {"<s>", kStartId}};

  const int order = cfg.ngram_order;
  const std::size_t pad = static_cast<std::size_t>(order - 1);

  // Raw counts of every n-gram ending at a predicted position, per order.
  std::vector<std::map<std::vector<Id>, std::uint64_t>> raw(static_cast<std::size_t>(order) + 1);
  bool any_token = false;
  for (const std::string& text : evidence) {
    const std::vector<std::string> tokens = text::lm_tokens(text);
    if (tokens.empty()) continue;
    any_token = true;
    std::vector<Id> padded(pad, kStartId);
    for (const std::string& token : tokens) {
      auto [it, inserted] = token_to_id_.try_emplace(token, static_cast<Id>(id_to_token_.size()));
      if (inserted) id_to_token_.push_back(token);
      padded.push_back(it->second);
    }
    for (std::size_t i = pad; i < padded.size(); ++i)
      for (int m = 1; m <= order; ++m)
        ++raw[static_cast<std::size_t>(m)][std::vector<Id>(padded.begin() + static_cast<std::ptrdiff_t>(i + 1 - static_cast<std::size_t>(m)),
                                                           padded.begin() + static_cast<std::ptrdiff_t>(i + 1))];
  }
  if (!any_token) throw DataError("grounding evidence contains no tokens");

  tables_.assign(static_cast<std::size_t>(order) + 1, Table{});
  discounts_.assign(static_cast<std::size_t>(order) + 1, -1.0);

  for (int m = 1; m <= order; ++m) {
    std::map<std::vector<Id>, std::uint64_t> counts;
    if (m == order || cfg.smoothing == Smoothing::AddK) {
      counts = raw[static_cast<std::size_t>(m)];
    } else {
      // Continuation count: distinct left extensions among the (m+1)-grams.
      for (const auto& [gram, c] : raw[static_cast<std::size_t>(m) + 1])
        ++counts[std::vector<Id>(gram.begin() + 1, gram.end())];
    }

    std::uint64_t n1 = 0;
    std::uint64_t n2 = 0;
    Table& table = tables_[static_cast<std::size_t>(m)];
    for (const auto& [gram, c] : counts) {
      if (c == 1) ++n1;
      if (c == 2) ++n2;
      ContextStats& stats = table[Context(gram.begin(), gram.end() - 1)];
      stats.counts[gram.back()] += c;
      stats.total += c;
    }
    if (cfg.smoothing == Smoothing::KneserNey && n1 > 0 && n2 > 0) {
      const double d = static_cast<double>(n1) / static_cast<double>(n1 + 2 * n2);
      if (d > 0.0 && d < 1.0) discounts_[static_cast<std::size_t>(m)] = d;
    }
  }
  grounded_ = true;
}

double NgramScorer::discount(int order) const {
  require_grounded();
  if (order < 1 || order > cfg_.ngram_order) throw std::out_of_range("order outside the model");
  return discounts_[static_cast<std::size_t>(order)];
}

void NgramScorer::require_grounded() const {
  if (!grounded_) throw NotGroundedError();
}

NgramScorer::Id NgramScorer::lookup(const std::string& token) const {
  const auto it = token_to_id_.find(token);
  if (it == token_to_id_.end() || it->second == kStartId) return kUnknownId;
  return it->second;
}

// padded_history holds exactly order-1 ids (start markers included).
double NgramScorer::probability_ids(const Context& padded_history, Id word, int order) const {
  const double vocab = static_cast<double>(vocabulary_size());
  if (order == 0) return 1.0 / vocab;

  const int top = cfg_.ngram_order;
  if (cfg_.smoothing == Smoothing::AddK) {
    const Table& table = tables_[static_cast<std::size_t>(top)];
    const auto it = table.find(padded_history);
    double c = 0.0;
    double total = 0.0;
    if (it != table.end()) {
      total = static_cast<double>(it->second.total);
      const auto w = it->second.counts.find(word);
      if (w != it->second.counts.end()) c = static_cast<double>(w->second);
    }
    return (c + cfg_.add_k) / (total + cfg_.add_k * vocab);
  }

  const Context context(padded_history.end() - (order - 1), padded_history.end());
  const double lower = probability_ids(padded_history, word, order - 1);
  const Table& table = tables_[static_cast<std::size_t>(order)];
  const auto it = table.find(context);
  if (it == table.end() || it->second.total == 0) return lower;

  const ContextStats& stats = it->second;
  const double total = static_cast<double>(stats.total);
  double c = 0.0;
  if (const auto w = stats.counts.find(word); w != stats.counts.end()) c = static_cast<double>(w->second);

  const double d = discounts_[static_cast<std::size_t>(order)];
  if (d < 0.0) {
    const double pseudo = cfg_.add_k * vocab;
    return (c + pseudo * lower) / (total + pseudo);
  }
  const double types = static_cast<double>(stats.counts.size());
  return std::max(c - d, 0.0) / total + d * types / total * lower;
}

double NgramScorer::probability(std::span<const std::string> history, const std::string& token) const {
  require_grounded();
  const std::size_t width = static_cast<std::size_t>(cfg_.ngram_order - 1);
  Context padded(width, kStartId);
  const std::size_t take = std::min(width, history.size());
  for (std::size_t i = 0; i < take; ++i) padded[width - take + i] = lookup(history[history.size() - take + i]);
  return probability_ids(padded, lookup(token), cfg_.ngram_order);
}

double NgramScorer::log_prob(std::span<const std::string> history, const std::string& token) const {
  return std::log(probability(history, token));
}

double NgramScorer::sequence_log_prob(const TokenSequence& seq) const {
  require_grounded();
  return debunk::sequence_log_prob(static_cast<const ConditionalModel&>(*this), seq);
}

double NgramScorer::perplexity(std::string_view text) const {
  require_grounded();
  const TokenSequence seq = tokenize(text);
  return perplexity_from_log_prob(sequence_log_prob(seq), seq.size());
}

std::vector<std::string> NgramScorer::vocabulary() const {
  require_grounded();
  std::vector<std::string> out;
  out.reserve(vocabulary_size());
  for (std::size_t id = 0; id < id_to_token_.size(); ++id)
    if (id != kStartId) out.push_back(id_to_token_[id]);
  return out;
}

}  // namespace debunk
