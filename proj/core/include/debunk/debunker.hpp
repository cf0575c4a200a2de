#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "debunk/data_model.hpp"
#include "debunk/evidence_filter.hpp"
#include "debunk/lm.hpp"
#include "debunk/metrics.hpp"
#include "debunk/retrieval.hpp"

namespace debunk {

struct Verdict {
  std::string claim_id;
  double ppl = 0.0;
  double threshold = 0.0;
  Label predicted = Label::True;
  std::optional<Label> gold;
  std::optional<std::size_t> fold;
  bool no_evidence = false;

  bool operator==(const Verdict&) const = default;
};

/// {"claim_id","ppl","threshold","predicted","gold","fold","no_evidence"}
nlohmann::json to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

enum class Objective { Accuracy, F1Macro };

std::string_view to_string(Objective o);
Objective parse_objective(std::string_view s);

/// Picks the threshold maximizing the objective among: half the smallest
/// perplexity, every midpoint between consecutive distinct perplexities, and
/// the largest perplexity plus one. Ties go to the smaller threshold. When all
/// perplexities are equal, returns that value with a warning. Throws
/// DataError unless both labels occur.
double search_threshold(std::span<const ScoredItem> scored, Objective objective);

struct ScoredClaim {
  std::string claim_id;
  double ppl;
  Label gold;
};

/// Stratified fold index for every item, in input order. Each label's items
/// are shuffled with a seeded Fisher-Yates pass and dealt round-robin, the
/// second label continuing where the first stopped.
std::vector<std::size_t> assign_folds(std::span<const Label> golds, std::size_t k, std::uint64_t seed);

struct CalibrationOptions {
  std::size_t k = 4;
  std::uint64_t seed = 0;
  Objective objective = Objective::Accuracy;
  /// When non-empty, used as fold f's threshold instead of searching.
  std::vector<double> preset_thresholds;

  bool operator==(const CalibrationOptions&) const = default;
};

struct CalibrationResult {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  Objective objective = Objective::Accuracy;
  bool thresholds_preset = false;
  std::vector<std::pair<std::string, std::size_t>> fold_assignments;  // input order
  std::vector<double> per_fold_threshold;
  std::vector<MetricBundle> per_fold_metrics;
  MetricBundle averaged_metrics;

  std::optional<std::size_t> fold_of(std::string_view claim_id) const;
};

nlohmann::json to_json(const CalibrationResult& r);
CalibrationResult calibration_from_json(const nlohmann::json& j);

/// k-fold cross-validation of the threshold: for each fold the threshold is
/// searched on the other folds and applied to this one. Averaged metrics are
/// the unweighted mean over folds.
CalibrationResult cross_validate(std::span<const ScoredClaim> scored, const CalibrationOptions& options);

/// Same, with fold assignments fixed by the caller.
CalibrationResult cross_validate_with_folds(std::span<const ScoredClaim> scored, std::span<const std::size_t> folds,
                                            const CalibrationOptions& options);

struct RetrievalConfig {
  std::size_t top_k = 10;
  text::TermOptions terms;

  bool operator==(const RetrievalConfig&) const = default;
};

struct PipelineConfig {
  RetrievalConfig retrieval;
  FilterConfig filter;
  GroundingConfig grounding;
  CalibrationOptions calibration;
  /// Classify every claim against this threshold instead of cross-validating.
  std::optional<double> fixed_threshold;
  /// Ground a fresh scorer per fold on that fold's evidence only.
  bool ground_per_fold = false;
  /// Worker threads for retrieval and scoring; 0 means all cores.
  std::size_t jobs = 1;
};

using ScorerFactory = std::function<std::unique_ptr<Scorer>()>;

struct PipelineResult {
  std::vector<EvidenceSet> evidence_sets;           // claim order
  std::vector<std::vector<std::string>> grounding;  // one entry, or one per fold
  std::vector<double> perplexities;                 // claim order
  std::vector<Verdict> verdicts;                    // claim order
  std::optional<CalibrationResult> calibration;
  std::string perplexity_unit;
};

/// Top-k retrieval followed by filtering, per claim, in claim order.
std::vector<EvidenceSet> select_evidence(std::span<const Claim> claims, const EvidenceExtractor& extractor,
                                         const RetrievalConfig& retrieval, const FilterConfig& filter,
                                         std::size_t jobs = 1);

/// Perplexity of every claim text under a grounded scorer.
std::vector<double> score_claims(std::span<const Claim> claims, const Scorer& scorer, std::size_t jobs = 1);

/// Evidence selection, aggregation, grounding, scoring, and classification
/// (fixed threshold, or cross-validated thresholds when claims carry gold
/// labels). Throws DataError for an empty claim list before doing any work.
PipelineResult run_pipeline(std::span<const Claim> claims, std::span<const SourceDocument> corpus,
                            const PipelineConfig& cfg, const ScorerFactory& make_scorer);

/// Classification stage on already scored claims; shared by run_pipeline and
/// the stage-wise CLI.
struct Classification {
  std::vector<Verdict> verdicts;
  std::optional<CalibrationResult> calibration;
};

Classification classify_scored(std::span<const Claim> claims, std::span<const double> perplexities,
                               const std::vector<bool>& no_evidence, const PipelineConfig& cfg,
                               std::optional<std::span<const std::size_t>> folds = std::nullopt);

}  // namespace debunk
