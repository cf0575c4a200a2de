#include "debunk/debunker.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "debunk/error.hpp"
#include "debunk/log.hpp"
#include "debunk/parallel.hpp"

namespace debunk {

using nlohmann::json;

namespace {

// Uniform integer in [0, bound) from raw mt19937_64 output; std::uniform_int_distribution
// is implementation-defined and would make fold splits differ across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}

double objective_value(const MetricBundle& m, Objective objective) {
  return objective == Objective::Accuracy ? m.accuracy : m.f1_macro;
}

json optional_label(const std::optional<Label>& l) { return l ? json(std::string(to_string(*l))) : json(nullptr); }

}  // namespace

json to_json(const Verdict& v) {
  return json{{"claim_id", v.claim_id},
              {"ppl", v.ppl},
              {"threshold", v.threshold},
              {"predicted", std::string(to_string(v.predicted))},
              {"gold", optional_label(v.gold)},
              {"fold", v.fold ? json(*v.fold) : json(nullptr)},
              {"no_evidence", v.no_evidence}};
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  v.claim_id = j.at("claim_id").get<std::string>();
  v.ppl = j.at("ppl").get<double>();
  v.threshold = j.at("threshold").get<double>();
  v.predicted = parse_label(j.at("predicted").get<std::string>());
  if (!j.at("gold").is_null()) v.gold = parse_label(j.at("gold").get<std::string>());
  if (!j.at("fold").is_null()) v.fold = j.at("fold").get<std::size_t>();
  v.no_evidence = j.at("no_evidence").get<bool>();
  return v;
}

std::string_view to_string(Objective o) { return o == Objective::Accuracy ? "accuracy" : "f1_macro"; }

Objective parse_objective(std::string_view s) {
  if (s == "accuracy") return Objective::Accuracy;
  if (s == "f1_macro") return Objective::F1Macro;
  throw ConfigError("unknown objective \"" + std::string(s) + "\" (expected accuracy or f1_macro)");
}

double search_threshold(std::span<const ScoredItem> scored, Objective objective) {
  if (scored.empty()) throw DataError("threshold search needs at least one scored claim");
  const bool has_false = std::any_of(scored.begin(), scored.end(), [](const ScoredItem& s) { return s.gold == Label::False; });
  const bool has_true = std::any_of(scored.begin(), scored.end(), [](const ScoredItem& s) { return s.gold == Label::True; });
  if (!has_false) throw DataError("threshold search needs both labels; no False claims present");
  if (!has_true) throw DataError("threshold search needs both labels; no True claims present");

  std::vector<double> values;
  values.reserve(scored.size());
  for (const ScoredItem& s : scored) {
    if (!(s.ppl > 0.0)) throw DataError("perplexities must be positive");
    values.push_back(s.ppl);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  if (values.size() == 1) {
    log_warning("all perplexities are equal; threshold search is degenerate");
    return values.front();
  }

  std::vector<double> candidates;
  candidates.reserve(values.size() + 1);
  candidates.push_back(values.front() / 2.0);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) candidates.push_back((values[i] + values[i + 1]) / 2.0);
  candidates.push_back(values.back() + 1.0);

  const std::vector<SweepPoint> points = threshold_sweep(scored, candidates);
  double best_threshold = points.front().threshold;
  double best_value = objective_value(points.front().metrics, objective);
  for (const SweepPoint& p : points) {
    const double value = objective_value(p.metrics, objective);
    if (value > best_value) {
      best_value = value;
      best_threshold = p.threshold;
    }
  }
  return best_threshold;
}

std::vector<std::size_t> assign_folds(std::span<const Label> golds, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be at least 2 (k=" + std::to_string(k) + " leaves no training split)");
  if (golds.size() < k)
    throw DataError("cannot split " + std::to_string(golds.size()) + " claims into " + std::to_string(k) + " folds");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> folds(golds.size(), 0);
  std::size_t dealt = 0;
  for (Label label : {Label::False, Label::True}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < golds.size(); ++i)
      if (golds[i] == label) members.push_back(i);
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[bounded(rng, i)]);
    for (std::size_t idx : members) folds[idx] = dealt++ % k;
  }
  return folds;
}

std::optional<std::size_t> CalibrationResult::fold_of(std::string_view claim_id) const {
  for (const auto& [id, fold] : fold_assignments)
    if (id == claim_id) return fold;
  return std::nullopt;
}

json to_json(const CalibrationResult& r) {
  json assignments = json::array();
  for (const auto& [id, fold] : r.fold_assignments) assignments.push_back(json{{"claim_id", id}, {"fold", fold}});
  json metrics = json::array();
  for (const MetricBundle& m : r.per_fold_metrics) metrics.push_back(to_json(m));
  return json{{"k", r.k},
              {"seed", r.seed},
              {"objective", std::string(to_string(r.objective))},
              {"thresholds_preset", r.thresholds_preset},
              {"fold_assignments", assignments},
              {"per_fold_threshold", r.per_fold_threshold},
              {"per_fold_metrics", metrics},
              {"averaged_metrics", to_json(r.averaged_metrics)}};
}

CalibrationResult calibration_from_json(const json& j) {
  CalibrationResult r;
  r.k = j.at("k").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.objective = parse_objective(j.at("objective").get<std::string>());
  r.thresholds_preset = j.at("thresholds_preset").get<bool>();
  for (const json& a : j.at("fold_assignments"))
    r.fold_assignments.emplace_back(a.at("claim_id").get<std::string>(), a.at("fold").get<std::size_t>());
  r.per_fold_threshold = j.at("per_fold_threshold").get<std::vector<double>>();
  for (const json& m : j.at("per_fold_metrics")) r.per_fold_metrics.push_back(metric_bundle_from_json(m));
  r.averaged_metrics = metric_bundle_from_json(j.at("averaged_metrics"));
  return r;
}

CalibrationResult cross_validate_with_folds(std::span<const ScoredClaim> scored, std::span<const std::size_t> folds,
                                            const CalibrationOptions& options) {
  const std::size_t k = options.k;
  if (k < 2) throw ConfigError("k must be at least 2 (k=" + std::to_string(k) + " leaves no training split)");
  if (folds.size() != scored.size()) throw std::invalid_argument("one fold index per scored claim required");
  if (!options.preset_thresholds.empty()) {
    if (options.preset_thresholds.size() != k)
      throw ConfigError("expected " + std::to_string(k) + " preset thresholds, got " +
                        std::to_string(options.preset_thresholds.size()));
    for (double t : options.preset_thresholds)
      if (!(t > 0.0)) throw ConfigError("preset thresholds must be positive");
  }

  CalibrationResult result;
  result.k = k;
  result.seed = options.seed;
  result.objective = options.objective;
  result.thresholds_preset = !options.preset_thresholds.empty();
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (folds[i] >= k) throw std::invalid_argument("fold index out of range");
    result.fold_assignments.emplace_back(scored[i].claim_id, folds[i]);
  }

  for (std::size_t f = 0; f < k; ++f) {
    std::vector<ScoredItem> train;
    std::vector<ScoredItem> test;
    for (std::size_t i = 0; i < scored.size(); ++i)
      (folds[i] == f ? test : train).push_back(ScoredItem{scored[i].ppl, scored[i].gold});
    if (test.empty()) throw DataError("fold " + std::to_string(f) + " is empty; use a smaller k");

    double threshold = 0.0;
    if (result.thresholds_preset) {
      threshold = options.preset_thresholds[f];
    } else {
      for (Label label : {Label::False, Label::True}) {
        const bool present = std::any_of(train.begin(), train.end(), [&](const ScoredItem& s) { return s.gold == label; });
        if (!present)
          throw DataError("training split for fold " + std::to_string(f) + " has no " + std::string(to_string(label)) +
                          " claims; use a smaller k");
      }
      threshold = search_threshold(train, options.objective);
    }

    std::vector<Prediction> predictions;
    predictions.reserve(test.size());
    for (const ScoredItem& s : test) predictions.push_back(Prediction{classify(s.ppl, threshold), s.gold});
    result.per_fold_threshold.push_back(threshold);
    result.per_fold_metrics.push_back(compute_metrics(predictions));
  }
  result.averaged_metrics = mean_metrics(result.per_fold_metrics);
  return result;
}

CalibrationResult cross_validate(std::span<const ScoredClaim> scored, const CalibrationOptions& options) {
  const bool has_false = std::any_of(scored.begin(), scored.end(), [](const ScoredClaim& s) { return s.gold == Label::False; });
  const bool has_true = std::any_of(scored.begin(), scored.end(), [](const ScoredClaim& s) { return s.gold == Label::True; });
  if (!has_false || !has_true) throw DataError("cross-validation needs both True and False claims");
  std::vector<Label> golds;
  golds.reserve(scored.size());
  for (const ScoredClaim& s : scored) golds.push_back(s.gold);
  const std::vector<std::size_t> folds = assign_folds(golds, options.k, options.seed);
  return cross_validate_with_folds(scored, folds, options);
}

std::vector<EvidenceSet> select_evidence(std::span<const Claim> claims, const EvidenceExtractor& extractor,
                                         const RetrievalConfig& retrieval, const FilterConfig& filter,
                                         std::size_t jobs) {
  filter.validate();
  std::vector<EvidenceSet> sets(claims.size());
  parallel_for(claims.size(), jobs, [&](std::size_t i) {
    sets[i] = filter_candidates(claims[i], extractor.top_candidates(claims[i].text, retrieval.top_k), filter);
  });
  return sets;
}

std::vector<double> score_claims(std::span<const Claim> claims, const Scorer& scorer, std::size_t jobs) {
  if (!scorer.grounded()) throw NotGroundedError();
  std::vector<double> ppl(claims.size(), 0.0);
  parallel_for(claims.size(), jobs, [&](std::size_t i) { ppl[i] = scorer.perplexity(claims[i].text); });
  return ppl;
}

Classification classify_scored(std::span<const Claim> claims, std::span<const double> perplexities,
                               const std::vector<bool>& no_evidence, const PipelineConfig& cfg,
                               std::optional<std::span<const std::size_t>> folds) {
  if (perplexities.size() != claims.size() || no_evidence.size() != claims.size())
    throw std::invalid_argument("one perplexity and evidence flag per claim required");

  Classification out;
  out.verdicts.resize(claims.size());
  for (std::size_t i = 0; i < claims.size(); ++i) {
    Verdict& v = out.verdicts[i];
    v.claim_id = claims[i].id;
    v.ppl = perplexities[i];
    v.gold = claims[i].label;
    v.no_evidence = no_evidence[i];
  }

  if (cfg.fixed_threshold) {
    if (!(*cfg.fixed_threshold > 0.0)) throw ConfigError("threshold must be positive");
    for (Verdict& v : out.verdicts) {
      v.threshold = *cfg.fixed_threshold;
      v.predicted = classify(v.ppl, v.threshold);
    }
    return out;
  }

  std::vector<ScoredClaim> scored;
  scored.reserve(claims.size());
  for (std::size_t i = 0; i < claims.size(); ++i) {
    if (!claims[i].label)
      throw DataError("claim \"" + claims[i].id + "\" has no gold label; calibration needs labels or a fixed threshold");
    scored.push_back(ScoredClaim{claims[i].id, perplexities[i], *claims[i].label});
  }
  CalibrationResult calibration = folds ? cross_validate_with_folds(scored, *folds, cfg.calibration)
                                        : cross_validate(scored, cfg.calibration);
  for (std::size_t i = 0; i < claims.size(); ++i) {
    Verdict& v = out.verdicts[i];
    v.fold = calibration.fold_assignments[i].second;
    v.threshold = calibration.per_fold_threshold[*v.fold];
    v.predicted = classify(v.ppl, v.threshold);
  }
  out.calibration = std::move(calibration);
  return out;
}

PipelineResult run_pipeline(std::span<const Claim> claims, std::span<const SourceDocument> corpus,
                            const PipelineConfig& cfg, const ScorerFactory& make_scorer) {
  if (claims.empty()) throw DataError("no claims to debunk");
  if (corpus.empty()) throw DataError("corpus is empty");
  cfg.filter.validate();
  cfg.grounding.validate();

  PipelineResult result;
  const TfIdfIndex index =
      TfIdfIndex::build(segment_corpus(std::vector<SourceDocument>(corpus.begin(), corpus.end())), cfg.retrieval.terms);
  result.evidence_sets = select_evidence(claims, index, cfg.retrieval, cfg.filter, cfg.jobs);

  std::vector<bool> flags(claims.size());
  for (std::size_t i = 0; i < claims.size(); ++i) flags[i] = result.evidence_sets[i].empty();
  const std::size_t missing = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
  if (missing > 0) log_notice(std::to_string(missing) + " claim(s) have no evidence; they are scored anyway");

  result.perplexities.assign(claims.size(), 0.0);
  std::optional<std::vector<std::size_t>> folds;

  if (cfg.ground_per_fold && !cfg.fixed_threshold) {
    std::vector<Label> golds;
    for (const Claim& c : claims) {
      if (!c.label) throw DataError("claim \"" + c.id + "\" has no gold label; per-fold grounding needs labels");
      golds.push_back(*c.label);
    }
    folds = assign_folds(golds, cfg.calibration.k, cfg.calibration.seed);
    for (std::size_t f = 0; f < cfg.calibration.k; ++f) {
      std::vector<EvidenceSet> fold_sets;
      std::vector<Claim> fold_claims;
      std::vector<std::size_t> positions;
      for (std::size_t i = 0; i < claims.size(); ++i) {
        if ((*folds)[i] != f) continue;
        fold_sets.push_back(result.evidence_sets[i]);
        fold_claims.push_back(claims[i]);
        positions.push_back(i);
      }
      std::vector<std::string> evidence = aggregate_evidence(fold_sets);
      std::unique_ptr<Scorer> scorer = make_scorer();
      scorer->ground(evidence, cfg.grounding);
      const std::vector<double> ppl = score_claims(fold_claims, *scorer, cfg.jobs);
      for (std::size_t j = 0; j < positions.size(); ++j) result.perplexities[positions[j]] = ppl[j];
      result.perplexity_unit = scorer->perplexity_unit();
      result.grounding.push_back(std::move(evidence));
    }
  } else {
    std::vector<std::string> evidence = aggregate_evidence(result.evidence_sets);
    std::unique_ptr<Scorer> scorer = make_scorer();
    scorer->ground(evidence, cfg.grounding);
    result.perplexities = score_claims(claims, *scorer, cfg.jobs);
    result.perplexity_unit = scorer->perplexity_unit();
    result.grounding.push_back(std::move(evidence));
  }

  Classification classification =
      folds ? classify_scored(claims, result.perplexities, flags, cfg, std::span<const std::size_t>(*folds))
            : classify_scored(claims, result.perplexities, flags, cfg);
  result.verdicts = std::move(classification.verdicts);
  result.calibration = std::move(classification.calibration);
  return result;
}

}  // namespace debunk
