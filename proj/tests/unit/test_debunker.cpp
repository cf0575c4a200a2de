#include <doctest.h>

#include <algorithm>
#include <mutex>
#include <set>

#include "debunk/debunker.hpp"
#include "debunk/error.hpp"
#include "debunk/ngram.hpp"
#include "fixtures.hpp"

using namespace debunk;

namespace {

constexpr Label F = Label::False;
constexpr Label T = Label::True;

std::vector<ScoredClaim> separable_eight() {
  return {{"f1", 100, F}, {"f2", 101, F}, {"f3", 102, F}, {"f4", 103, F},
          {"t1", 1, T},   {"t2", 2, T},   {"t3", 3, T},   {"t4", 4, T}};
}

// Records every grounding call and answers with the text length.
class SpyScorer final : public Scorer {
 public:
  struct Log {
    std::mutex mutex;
    std::vector<std::vector<std::string>> groundings;
  };
  explicit SpyScorer(std::shared_ptr<Log> log) : log_(std::move(log)) {}

  ScorerKind kind() const override { return ScorerKind::External; }
  bool grounded() const override { return grounded_; }
  void ground(std::span<const std::string> evidence, const GroundingConfig&) override {
    std::lock_guard lock(log_->mutex);
    log_->groundings.emplace_back(evidence.begin(), evidence.end());
    grounded_ = true;
  }
  double perplexity(std::string_view text) const override {
    if (!grounded_) throw NotGroundedError();
    return static_cast<double>(text.size());
  }
  double sequence_log_prob(const TokenSequence&) const override { throw Error("spy reports perplexity only"); }
  void reset() override { grounded_ = false; }
  std::string perplexity_unit() const override { return "char"; }

 private:
  std::shared_ptr<Log> log_;
  bool grounded_ = false;
};

PipelineConfig seeded(std::uint64_t seed = 7) {
  PipelineConfig cfg;
  cfg.calibration.seed = seed;
  return cfg;
}

ScorerFactory ngram() {
  return [] { return std::make_unique<NgramScorer>(); };
}

}  // namespace

TEST_CASE("threshold search picks the midpoint of the separating gap") {
  const std::vector<ScoredItem> items = {{30, F}, {40, F}, {5, T}, {10, T}};
  CHECK(search_threshold(items, Objective::Accuracy) == 20.0);
  CHECK(search_threshold(items, Objective::F1Macro) == 20.0);
}

TEST_CASE("threshold search: ties go to the smaller threshold") {
  // 7.5 and 21 both classify two of three correctly; the smaller wins.
  const std::vector<ScoredItem> items = {{5, T}, {10, F}, {20, T}};
  const double th = search_threshold(items, Objective::Accuracy);
  CHECK(th == 7.5);
  const std::vector<ScoredItem> flipped = {{5, F}, {10, T}};
  CHECK(search_threshold(flipped, Objective::Accuracy) == 2.5);
}

TEST_CASE("threshold search edge cases") {
  const std::vector<ScoredItem> same = {{7, F}, {7, T}};
  CHECK(search_threshold(same, Objective::Accuracy) == 7.0);
  const std::vector<ScoredItem> only_false = {{7, F}, {9, F}};
  CHECK_THROWS_WITH_AS(search_threshold(only_false, Objective::Accuracy),
                       "threshold search needs both labels; no True claims present", DataError);
  const std::vector<ScoredItem> only_true = {{7, T}};
  CHECK_THROWS_WITH_AS(search_threshold(only_true, Objective::Accuracy),
                       "threshold search needs both labels; no False claims present", DataError);
  CHECK_THROWS_AS(search_threshold(std::vector<ScoredItem>{}, Objective::Accuracy), DataError);
}

TEST_CASE("fold assignment is a seeded stratified partition") {
  std::vector<Label> golds;
  for (int i = 0; i < 23; ++i) golds.push_back(i % 3 == 0 ? T : F);
  const auto folds = assign_folds(golds, 4, 11);
  CHECK(folds == assign_folds(golds, 4, 11));
  CHECK(folds != assign_folds(golds, 4, 12));

  std::vector<std::size_t> size(4), falses(4);
  for (std::size_t i = 0; i < golds.size(); ++i) {
    REQUIRE(folds[i] < 4);
    ++size[folds[i]];
    falses[folds[i]] += golds[i] == F;
  }
  CHECK(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()) <= 1);
  CHECK(*std::max_element(falses.begin(), falses.end()) - *std::min_element(falses.begin(), falses.end()) <= 1);

  CHECK_THROWS_AS(assign_folds(golds, 1, 0), ConfigError);
  CHECK_THROWS_AS(assign_folds(std::vector<Label>{F, T}, 3, 0), DataError);
}

TEST_CASE("cross-validation on a separable fixture") {
  const auto scored = separable_eight();
  CalibrationOptions options;
  options.k = 4;
  options.seed = 5;
  const CalibrationResult r = cross_validate(scored, options);
  CHECK(r.averaged_metrics.accuracy == 1.0);
  CHECK(r.averaged_metrics.f1_macro == 1.0);
  CHECK(r.per_fold_threshold.size() == 4);
  CHECK(r.fold_of("f1").has_value());
  CHECK_FALSE(r.fold_of("nope").has_value());
  CHECK(to_json(r).dump() == to_json(cross_validate(scored, options)).dump());
  CHECK(to_json(calibration_from_json(to_json(r))).dump() == to_json(r).dump());

  options.k = 8;  // leave-one-out
  CHECK(cross_validate(scored, options).averaged_metrics.accuracy == 1.0);
  options.k = 1;
  CHECK_THROWS_AS(cross_validate(scored, options), ConfigError);
  options.k = 9;
  CHECK_THROWS_AS(cross_validate(scored, options), DataError);
}

TEST_CASE("cross-validation errors when a training split loses a class") {
  const std::vector<ScoredClaim> scored = {{"a", 10, F}, {"b", 1, T}, {"c", 2, T}, {"d", 3, T}};
  const std::vector<std::size_t> folds = {0, 1, 1, 0};
  CalibrationOptions options;
  options.k = 2;
  CHECK_THROWS_WITH_AS(cross_validate_with_folds(scored, folds, options),
                       "training split for fold 0 has no false claims; use a smaller k", DataError);
  const std::vector<std::size_t> lonely = {1, 1, 1, 1};
  CHECK_THROWS_WITH_AS(cross_validate_with_folds(scored, lonely, options), "fold 0 is empty; use a smaller k", DataError);
}

TEST_CASE("preset thresholds bypass the search") {
  auto scored = separable_eight();
  CalibrationOptions options;
  options.k = 4;
  options.preset_thresholds = {15, 24, 17, 20};
  const CalibrationResult r = cross_validate(scored, options);
  CHECK(r.thresholds_preset);
  CHECK(r.per_fold_threshold == std::vector<double>{15, 24, 17, 20});
  CHECK(r.averaged_metrics.accuracy == 1.0);
  options.preset_thresholds = {15, 24};
  CHECK_THROWS_AS(cross_validate(scored, options), ConfigError);
}

TEST_CASE("classify_scored with a fixed threshold") {
  const std::vector<Claim> claims = {{"a", "x", F, {}, {}}, {"b", "y", std::nullopt, {}, {}}};
  PipelineConfig cfg;
  cfg.fixed_threshold = 10.0;
  const std::vector<double> ppl = {12.0, 10.0};
  const Classification c = classify_scored(claims, ppl, {false, true}, cfg);
  CHECK_FALSE(c.calibration.has_value());
  CHECK(c.verdicts[0].predicted == F);
  CHECK(c.verdicts[1].predicted == T);
  CHECK(c.verdicts[1].no_evidence);
  CHECK(verdict_from_json(to_json(c.verdicts[0])) == c.verdicts[0]);

  cfg.fixed_threshold.reset();
  CHECK_THROWS_AS(classify_scored(claims, ppl, {false, false}, cfg), DataError);
}

TEST_CASE("grounding only ever sees selected evidence") {
  const auto ds = fixtures::separation_dataset();
  auto log = std::make_shared<SpyScorer::Log>();
  const ScorerFactory spy = [log] { return std::make_unique<SpyScorer>(log); };
  const PipelineResult run = run_pipeline(ds.claims, ds.corpus, seeded(), spy);

  REQUIRE(log->groundings.size() == 1);
  const auto& grounded = log->groundings.front();
  CHECK(grounded == run.grounding.front());
  std::set<std::string> selected;
  for (const EvidenceSet& s : run.evidence_sets)
    for (const ScoredCandidate& c : s.evidence) selected.insert(c.sentence.text);
  CHECK(std::set<std::string>(grounded.begin(), grounded.end()) == selected);
  for (const Claim& claim : ds.claims) CHECK(std::find(grounded.begin(), grounded.end(), claim.text) == grounded.end());
  CHECK(run.perplexity_unit == "char");
}

TEST_CASE("per-fold grounding uses each fold's evidence only") {
  const auto ds = fixtures::separation_dataset();
  auto log = std::make_shared<SpyScorer::Log>();
  const ScorerFactory spy = [log] { return std::make_unique<SpyScorer>(log); };
  PipelineConfig cfg = seeded();
  cfg.ground_per_fold = true;
  const PipelineResult run = run_pipeline(ds.claims, ds.corpus, cfg, spy);
  REQUIRE(log->groundings.size() == 4);
  REQUIRE(run.calibration.has_value());
  for (std::size_t f = 0; f < 4; ++f) {
    std::set<std::string> expected;
    for (std::size_t i = 0; i < ds.claims.size(); ++i)
      if (run.calibration->fold_assignments[i].second == f)
        for (const ScoredCandidate& c : run.evidence_sets[i].evidence) expected.insert(c.sentence.text);
    CHECK(std::set<std::string>(log->groundings[f].begin(), log->groundings[f].end()) == expected);
  }
}

TEST_CASE("separation dataset end to end") {
  const auto ds = fixtures::separation_dataset();
  const PipelineResult run = run_pipeline(ds.claims, ds.corpus, seeded(), ngram());
  double sum_false = 0, sum_true = 0;
  for (std::size_t i = 0; i < ds.claims.size(); ++i)
    (*ds.claims[i].label == F ? sum_false : sum_true) += run.perplexities[i];
  CHECK(sum_false > sum_true);
  REQUIRE(run.calibration.has_value());
  CHECK(run.calibration->averaged_metrics.accuracy >= 0.8);
  CHECK(run.perplexity_unit == "word");
  for (const Verdict& v : run.verdicts) CHECK(v.fold.has_value());
}

TEST_CASE("pipeline is deterministic and independent of thread count") {
  const auto ds = fixtures::separation_dataset();
  PipelineConfig cfg = seeded(3);
  const PipelineResult a = run_pipeline(ds.claims, ds.corpus, cfg, ngram());
  cfg.jobs = 4;
  const PipelineResult b = run_pipeline(ds.claims, ds.corpus, cfg, ngram());
  CHECK(a.perplexities == b.perplexities);
  CHECK(a.verdicts == b.verdicts);
  CHECK(a.evidence_sets == b.evidence_sets);
}

TEST_CASE("pipeline input errors") {
  const auto ds = fixtures::separation_dataset();
  CHECK_THROWS_AS(run_pipeline(std::vector<Claim>{}, ds.corpus, seeded(), ngram()), DataError);
  CHECK_THROWS_AS(run_pipeline(ds.claims, std::vector<SourceDocument>{}, seeded(), ngram()), DataError);
  NgramScorer ungrounded;
  CHECK_THROWS_AS(score_claims(ds.claims, ungrounded), NotGroundedError);

  // No claim shares a term with the corpus: nothing to ground on.
  const std::vector<Claim> stray = {{"x", "Zebras quasars tundra", F, {}, {}}, {"y", "Quasars", T, {}, {}}};
  CHECK_THROWS_AS(run_pipeline(stray, ds.corpus, seeded(), ngram()), DataError);
}
