#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "debunk/data_model.hpp"
#include "debunk/retrieval.hpp"

namespace debunk {

/// Evidence rejection rules, applied in declaration order.
enum class FilterRule {
  LowCredibilitySource,  // R1: quote attributed to a low-credibility source
  SpeakerStatement,      // R2: statement by the claim's own speaker
  ClaimRestatement,      // R3: evidence identical to the claim
  ReciprocalQuestion,    // R4: interrogative evidence
};

inline constexpr std::array<FilterRule, 4> kAllFilterRules = {
    FilterRule::LowCredibilitySource, FilterRule::SpeakerStatement, FilterRule::ClaimRestatement,
    FilterRule::ReciprocalQuestion};

/// "R1".."R4".
std::string_view rule_id(FilterRule rule);
std::optional<FilterRule> parse_rule_id(std::string_view id);

const std::vector<std::string>& default_low_credibility_patterns();

struct FilterConfig {
  std::vector<std::string> low_credibility_patterns = default_low_credibility_patterns();
  /// 1.0 means exact match of normalized text; below 1.0, token Jaccard
  /// similarity at or above the threshold counts as identical.
  double identical_similarity_threshold = 1.0;
  std::array<bool, 4> enabled = {true, true, true, true};
  std::size_t evidence_per_claim = 3;

  bool rule_enabled(FilterRule rule) const { return enabled[static_cast<std::size_t>(rule)]; }
  void set_rule(FilterRule rule, bool on) { enabled[static_cast<std::size_t>(rule)] = on; }
  bool any_rule_enabled() const;

  /// All rules off: plain top-N selection.
  static FilterConfig disabled();

  /// Throws ConfigError on an invalid combination.
  void validate() const;

  bool operator==(const FilterConfig&) const = default;
};

nlohmann::json to_json(const FilterConfig& cfg);
/// Missing keys keep their defaults. Keys: low_credibility_patterns,
/// identical_similarity_threshold, enabled_rules (["R1", ...]),
/// evidence_per_claim.
FilterConfig filter_config_from_json(const nlohmann::json& j);
FilterConfig load_filter_config(const std::filesystem::path& path);

struct Rejection {
  ScoredCandidate candidate;
  FilterRule rule;

  bool operator==(const Rejection&) const = default;
};

struct EvidenceSet {
  std::string claim_id;
  std::vector<ScoredCandidate> evidence;
  std::vector<Rejection> rejected;

  bool empty() const { return evidence.empty(); }
  bool operator==(const EvidenceSet&) const = default;
};

nlohmann::json to_json(const EvidenceSet& set);
EvidenceSet evidence_set_from_json(const nlohmann::json& j);

/// First enabled rule that rejects the candidate, if any.
std::optional<FilterRule> first_rejecting_rule(const Claim& claim, const ScoredCandidate& candidate,
                                               const FilterConfig& cfg);

/// Applies the enabled rules to candidates (sorted by descending score) and
/// keeps the best `cfg.evidence_per_claim` survivors.
EvidenceSet filter_candidates(const Claim& claim, const std::vector<ScoredCandidate>& candidates,
                              const FilterConfig& cfg);

/// Evidence texts in claim order then rank order, exact duplicates dropped
/// (first occurrence wins). Throws DataError when every set is empty.
std::vector<std::string> aggregate_evidence(const std::vector<EvidenceSet>& sets);

/// One JSON line per kept or rejected candidate:
/// {"claim_id", "evidence_text", "rejected_by"} with rejected_by null for
/// kept evidence.
std::string audit_jsonl(const std::vector<EvidenceSet>& sets);

}  // namespace debunk
