#include "debunk/evidence_filter.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include "debunk/error.hpp"
#include "debunk/text.hpp"

namespace debunk {

using nlohmann::json;

namespace {

const std::vector<std::string>& attribution_verbs() {
  static const std::vector<std::string> kVerbs = {"said", "says", "stated", "claimed", "tweeted"};
  return kVerbs;
}

bool contains_sequence(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

bool low_credibility(const std::vector<std::string>& candidate_terms, const FilterConfig& cfg) {
  for (const std::string& pattern : cfg.low_credibility_patterns)
    if (contains_sequence(candidate_terms, text::terms(pattern))) return true;
  return false;
}

bool attributed_to_speaker(const Claim& claim, const ScoredCandidate& candidate,
                           const std::vector<std::string>& candidate_terms) {
  if (!claim.speaker) return false;
  const std::string speaker = text::normalize(*claim.speaker);
  if (speaker.empty()) return false;
  if (candidate.sentence.speaker && text::normalize(*candidate.sentence.speaker) == speaker) return true;

  const std::vector<std::string> speaker_terms = text::terms(speaker);
  if (speaker_terms.empty()) return false;
  for (const std::string& verb : attribution_verbs()) {
    std::vector<std::string> phrase = speaker_terms;
    phrase.push_back(verb);
    if (contains_sequence(candidate_terms, phrase)) return true;
  }
  return false;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t shared = 0;
  for (const std::string& t : sa) shared += sb.count(t);
  return static_cast<double>(shared) / static_cast<double>(sa.size() + sb.size() - shared);
}

bool restates_claim(const Claim& claim, const ScoredCandidate& candidate, const FilterConfig& cfg,
                    const std::vector<std::string>& candidate_terms) {
  if (text::normalize(candidate.sentence.text) == text::normalize(claim.text)) return true;
  if (cfg.identical_similarity_threshold >= 1.0) return false;
  return jaccard(candidate_terms, text::terms(claim.text)) >= cfg.identical_similarity_threshold;
}

}  // namespace

std::string_view rule_id(FilterRule rule) {
  switch (rule) {
    case FilterRule::LowCredibilitySource: return "R1";
    case FilterRule::SpeakerStatement: return "R2";
    case FilterRule::ClaimRestatement: return "R3";
    case FilterRule::ReciprocalQuestion: return "R4";
  }
  return "?";
}

std::optional<FilterRule> parse_rule_id(std::string_view id) {
  if (id.size() != 2 || (id[0] != 'R' && id[0] != 'r')) return std::nullopt;
  for (FilterRule rule : kAllFilterRules)
    if (rule_id(rule)[1] == id[1]) return rule;
  return std::nullopt;
}

const std::vector<std::string>& default_low_credibility_patterns() {
  static const std::vector<std::string> kPatterns = {
      "social media post", "facebook post",    "internet meme", "viral post",
      "forwarded message", "whatsapp message", "tweet claims",
  };
  return kPatterns;
}

bool FilterConfig::any_rule_enabled() const {
  return std::any_of(enabled.begin(), enabled.end(), [](bool on) { return on; });
}

FilterConfig FilterConfig::disabled() {
  FilterConfig cfg;
  cfg.enabled = {false, false, false, false};
  return cfg;
}

void FilterConfig::validate() const {
  if (rule_enabled(FilterRule::LowCredibilitySource)) {
    if (low_credibility_patterns.empty()) throw ConfigError("R1 is enabled but low_credibility_patterns is empty");
    for (const std::string& p : low_credibility_patterns)
      if (text::terms(p).empty()) throw ConfigError("low-credibility pattern \"" + p + "\" has no words");
  }
  if (!(identical_similarity_threshold > 0.0 && identical_similarity_threshold <= 1.0))
    throw ConfigError("identical_similarity_threshold must lie in (0, 1]");
  if (evidence_per_claim == 0) throw ConfigError("evidence_per_claim must be positive");
}

json to_json(const FilterConfig& cfg) {
  json rules = json::array();
  for (FilterRule rule : kAllFilterRules)
    if (cfg.rule_enabled(rule)) rules.push_back(std::string(rule_id(rule)));
  return json{{"low_credibility_patterns", cfg.low_credibility_patterns},
              {"identical_similarity_threshold", cfg.identical_similarity_threshold},
              {"enabled_rules", rules},
              {"evidence_per_claim", cfg.evidence_per_claim}};
}

FilterConfig filter_config_from_json(const json& j) {
  FilterConfig cfg;
  try {
    if (j.contains("low_credibility_patterns"))
      cfg.low_credibility_patterns = j.at("low_credibility_patterns").get<std::vector<std::string>>();
    if (j.contains("identical_similarity_threshold"))
      cfg.identical_similarity_threshold = j.at("identical_similarity_threshold").get<double>();
    if (j.contains("evidence_per_claim")) cfg.evidence_per_claim = j.at("evidence_per_claim").get<std::size_t>();
    if (j.contains("enabled_rules")) {
      cfg.enabled = {false, false, false, false};
      for (const json& id : j.at("enabled_rules")) {
        const auto rule = parse_rule_id(id.get<std::string>());
        if (!rule) throw ConfigError("unknown filter rule " + id.dump());
        cfg.set_rule(*rule, true);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid filter config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

FilterConfig load_filter_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return filter_config_from_json(j);
}

json to_json(const EvidenceSet& set) {
  json evidence = json::array();
  for (const ScoredCandidate& c : set.evidence) evidence.push_back(to_json(c));
  json rejected = json::array();
  for (const Rejection& r : set.rejected) {
    json entry = to_json(r.candidate);
    entry["rejected_by"] = std::string(rule_id(r.rule));
    rejected.push_back(std::move(entry));
  }
  return json{{"claim_id", set.claim_id}, {"evidence", evidence}, {"rejected", rejected}};
}

EvidenceSet evidence_set_from_json(const json& j) {
  EvidenceSet set;
  set.claim_id = j.at("claim_id").get<std::string>();
  for (const json& c : j.at("evidence")) set.evidence.push_back(candidate_from_json(c));
  for (const json& r : j.at("rejected")) {
    const auto rule = parse_rule_id(r.at("rejected_by").get<std::string>());
    if (!rule) throw DataError("unknown rule in evidence record: " + r.at("rejected_by").dump());
    set.rejected.push_back(Rejection{candidate_from_json(r), *rule});
  }
  return set;
}

std::optional<FilterRule> first_rejecting_rule(const Claim& claim, const ScoredCandidate& candidate,
                                               const FilterConfig& cfg) {
  if (!cfg.any_rule_enabled()) return std::nullopt;
  const std::vector<std::string> candidate_terms = text::terms(candidate.sentence.text);
  if (cfg.rule_enabled(FilterRule::LowCredibilitySource) && low_credibility(candidate_terms, cfg))
    return FilterRule::LowCredibilitySource;
  if (cfg.rule_enabled(FilterRule::SpeakerStatement) && attributed_to_speaker(claim, candidate, candidate_terms))
    return FilterRule::SpeakerStatement;
  if (cfg.rule_enabled(FilterRule::ClaimRestatement) && restates_claim(claim, candidate, cfg, candidate_terms))
    return FilterRule::ClaimRestatement;
  if (cfg.rule_enabled(FilterRule::ReciprocalQuestion) && text::ends_with_question(candidate.sentence.text))
    return FilterRule::ReciprocalQuestion;
  return std::nullopt;
}

EvidenceSet filter_candidates(const Claim& claim, const std::vector<ScoredCandidate>& candidates,
                              const FilterConfig& cfg) {
  EvidenceSet set;
  set.claim_id = claim.id;
  std::vector<ScoredCandidate> survivors;
  for (const ScoredCandidate& candidate : candidates) {
    if (auto rule = first_rejecting_rule(claim, candidate, cfg)) {
      set.rejected.push_back(Rejection{candidate, *rule});
    } else {
      survivors.push_back(candidate);
    }
  }
  std::stable_sort(survivors.begin(), survivors.end(), ranks_before);
  if (survivors.size() > cfg.evidence_per_claim) survivors.resize(cfg.evidence_per_claim);
  set.evidence = std::move(survivors);
  return set;
}

std::vector<std::string> aggregate_evidence(const std::vector<EvidenceSet>& sets) {
  std::vector<std::string> texts;
  std::unordered_set<std::string> seen;
  for (const EvidenceSet& set : sets)
    for (const ScoredCandidate& c : set.evidence)
      if (seen.insert(c.sentence.text).second) texts.push_back(c.sentence.text);
  if (texts.empty()) throw DataError("no evidence was selected for any claim; nothing to ground on");
  return texts;
}

std::string audit_jsonl(const std::vector<EvidenceSet>& sets) {
  std::string out;
  for (const EvidenceSet& set : sets) {
    for (const ScoredCandidate& c : set.evidence)
      out += json{{"claim_id", set.claim_id}, {"evidence_text", c.sentence.text}, {"rejected_by", nullptr}}.dump(-1, ' ', false, json::error_handler_t::replace) +
             '\n';
    for (const Rejection& r : set.rejected)
      out += json{{"claim_id", set.claim_id},
                  {"evidence_text", r.candidate.sentence.text},
                  {"rejected_by", std::string(rule_id(r.rule))}}
                 .dump(-1, ' ', false, json::error_handler_t::replace) +
             '\n';
  }
  return out;
}

}  // namespace debunk
