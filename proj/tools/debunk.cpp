// debunk: stage-wise command line front end.
//
// Stages read and write plain files in one output directory:
//   ingest     claims.jsonl corpus.jsonl datasets.json
//   index      index.json
//   retrieve   evidence.jsonl audit.jsonl
//   ground     grounded.json
//   score      scores.jsonl
//   calibrate  verdicts.jsonl calibration.json
//   report     report.json report.md sweep.csv
// `evaluate` and `ablate` run the whole chain. The effective configuration of
// every stage is kept in run_config.json and echoed into reports.

#include <cstdlib>
#include <iomanip>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "debunk/config.hpp"
#include "debunk/data_model.hpp"
#include "debunk/debunker.hpp"
#include "debunk/error.hpp"
#include "debunk/evidence_filter.hpp"
#include "debunk/external_scorer.hpp"
#include "debunk/log.hpp"
#include "debunk/ngram.hpp"
#include "debunk/report.hpp"
#include "debunk/retrieval.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace debunk;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBridge = 3;

constexpr const char* kGroundedFormat = "debunk-grounding";

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::string> claims;
  std::optional<std::string> claims_format;
  std::optional<std::string> corpus;
  std::optional<std::string> index;
  std::optional<std::string> query;

  std::optional<std::size_t> top_k;
  bool stem = false;
  bool stop_words = false;

  bool no_filter = false;
  std::optional<std::string> filter_config;

  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<int> order;
  std::optional<std::string> smoothing;

  std::optional<std::string> scorer;
  std::optional<std::string> bridge;

  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> objective;
  std::vector<double> thresholds;
  std::optional<double> threshold;
  bool ground_per_fold = false;
  std::optional<std::size_t> jobs;
};

// ---------------------------------------------------------------- file I/O

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  const std::string content = read_text(path);
  try {
    return json::parse(content);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<json> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(path.string(), number, std::string("malformed JSON: ") + e.what());
    }
  }
  return rows;
}

template <typename T>
std::string to_jsonl(const std::vector<T>& items) {
  std::string out;
  for (const T& item : items) out += to_json(item).dump(-1, ' ', false, json::error_handler_t::replace) + '\n';
  return out;
}

fs::path require_file(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) throw DataError(path.string() + " not found; " + hint);
  return path;
}

// ---------------------------------------------------------- configuration

void add_out(CLI::App* cmd, Flags& f) {
  cmd->add_option("--out,-o", f.out, "Output directory for stage artifacts (default debunk-out)");
  cmd->add_option("--config", f.config, "JSON run configuration; explicit flags take precedence")
      ->check(CLI::ExistingFile);
}

void add_jobs(CLI::App* cmd, Flags& f) {
  cmd->add_option("--jobs,-j", f.jobs, "Worker threads (0 = all cores)");
}

void add_inputs(CLI::App* cmd, Flags& f) {
  cmd->add_option("--claims", f.claims, "Claims file (JSONL or TSV)");
  cmd->add_option("--claims-format", f.claims_format, "auto, jsonl or tsv")
      ->check(CLI::IsMember({"auto", "jsonl", "tsv"}));
  cmd->add_option("--corpus", f.corpus, "Source document corpus (JSONL)");
}

void add_terms(CLI::App* cmd, Flags& f) {
  cmd->add_flag("--stem", f.stem, "Porter-stem index terms");
  cmd->add_flag("--remove-stop-words", f.stop_words, "Drop English stop words from index terms");
}

void add_filter(CLI::App* cmd, Flags& f) {
  cmd->add_flag("--no-filter", f.no_filter, "Disable every filter rule (plain top-N evidence)");
  cmd->add_option("--filter-config", f.filter_config, "Filter configuration JSON")->check(CLI::ExistingFile);
}

void add_grounding(CLI::App* cmd, Flags& f) {
  cmd->add_option("--epochs", f.epochs, "Grounding epochs");
  cmd->add_option("--learning-rate", f.learning_rate, "Learning rate for neural scorers");
  cmd->add_option("--order", f.order, "n-gram order");
  cmd->add_option("--smoothing", f.smoothing, "kneser_ney or add_k")->check(CLI::IsMember({"kneser_ney", "add_k"}));
}

void add_scorer(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scorer", f.scorer, "ngram or external")->check(CLI::IsMember({"ngram", "external"}));
  cmd->add_option("--bridge", f.bridge, "External scorer address: tcp://host:port or exec:command")
      ->envname("DEBUNK_BRIDGE");
}

void add_calibration(CLI::App* cmd, Flags& f, const std::string& k_help) {
  cmd->add_option("--k", f.k, k_help);
  cmd->add_option("--seed", f.seed, "Fold assignment seed (required unless --threshold)");
  cmd->add_option("--objective", f.objective, "accuracy or f1_macro")->check(CLI::IsMember({"accuracy", "f1_macro"}));
  cmd->add_option("--thresholds", f.thresholds, "Preset per-fold thresholds, comma separated")->delimiter(',');
  cmd->add_option("--threshold", f.threshold, "Classify with this fixed threshold instead of cross-validation");
  cmd->add_flag("--ground-per-fold", f.ground_per_fold, "Ground one scorer per fold on that fold's evidence");
}

fs::path output_dir(const Flags& f) {
  if (f.out) return *f.out;
  if (f.config) {
    const RunConfig from_file = load_run_config(*f.config);
    return from_file.output_dir;
  }
  return RunConfig{}.output_dir;
}

// defaults < run_config.json of earlier stages < --config < explicit flags.
RunConfig resolve_config(const Flags& f, bool inherit_stage_config, std::optional<std::size_t> k_as_top_k = {}) {
  const fs::path dir = output_dir(f);
  RunConfig cfg;
  if (inherit_stage_config && fs::exists(dir / "run_config.json")) cfg = load_run_config(dir / "run_config.json");
  if (f.config) cfg = load_run_config(*f.config, cfg);
  cfg.output_dir = dir.string();

  PipelineConfig& p = cfg.pipeline;
  if (f.claims) cfg.claims_path = *f.claims;
  if (f.claims_format) cfg.claims_format = *f.claims_format;
  if (f.corpus) cfg.corpus_path = *f.corpus;
  if (f.top_k) p.retrieval.top_k = *f.top_k;
  if (k_as_top_k) p.retrieval.top_k = *k_as_top_k;
  if (f.stem) p.retrieval.terms.stem = true;
  if (f.stop_words) p.retrieval.terms.remove_stop_words = true;
  if (f.filter_config) p.filter = load_filter_config(*f.filter_config);
  if (f.no_filter) p.filter.enabled = FilterConfig::disabled().enabled;
  if (f.epochs) p.grounding.epochs = *f.epochs;
  if (f.learning_rate) p.grounding.learning_rate = *f.learning_rate;
  if (f.order) p.grounding.ngram_order = *f.order;
  if (f.smoothing) p.grounding.smoothing = parse_smoothing(*f.smoothing);
  if (f.scorer) cfg.scorer = parse_scorer_kind(*f.scorer);
  if (f.bridge) cfg.bridge_address = *f.bridge;
  if (f.k && !k_as_top_k) p.calibration.k = *f.k;
  if (f.seed) cfg.seed = *f.seed;
  if (f.objective) p.calibration.objective = parse_objective(*f.objective);
  if (!f.thresholds.empty()) p.calibration.preset_thresholds = f.thresholds;
  if (f.threshold) p.fixed_threshold = *f.threshold;
  if (f.ground_per_fold) p.ground_per_fold = true;
  if (f.jobs) p.jobs = *f.jobs;

  p.filter.validate();
  p.grounding.validate();
  if (p.retrieval.top_k == 0) throw ConfigError("top-k must be positive");
  if (cfg.scorer == ScorerKind::External && cfg.bridge_address.empty())
    throw ConfigError("--scorer external needs --bridge or DEBUNK_BRIDGE");
  return cfg;
}

void save_run_config(const RunConfig& cfg) {
  write_text(fs::path(cfg.output_dir) / "run_config.json", to_json(cfg).dump(2) + '\n');
}

ScorerFactory scorer_factory(const RunConfig& cfg) {
  if (cfg.scorer == ScorerKind::Ngram) return [] { return std::make_unique<NgramScorer>(); };
  const std::string address = cfg.bridge_address;
  return [address]() -> std::unique_ptr<Scorer> { return std::make_unique<ExternalScorer>(connect_bridge(address)); };
}

std::vector<Claim> load_input_claims(const RunConfig& cfg) {
  if (cfg.claims_path.empty()) throw ConfigError("--claims is required");
  return load_claims(cfg.claims_path, cfg.resolved_claims_format());
}

std::vector<SourceDocument> load_input_corpus(const RunConfig& cfg) {
  if (cfg.corpus_path.empty()) throw ConfigError("--corpus is required");
  return load_corpus(cfg.corpus_path);
}

std::vector<Claim> stage_claims(const fs::path& dir) {
  return load_claims(require_file(dir / "claims.jsonl", "run `debunk ingest` first"), ClaimFormat::Jsonl);
}

std::vector<DatasetChecksum> stage_datasets(const fs::path& dir) {
  std::vector<DatasetChecksum> out;
  if (!fs::exists(dir / "datasets.json")) return out;
  for (const json& d : read_json(dir / "datasets.json"))
    out.push_back(DatasetChecksum{d.at("path").get<std::string>(), d.at("bytes").get<std::size_t>(),
                                  d.at("fnv1a64").get<std::string>()});
  return out;
}

std::string datasets_json(const std::vector<DatasetChecksum>& datasets) {
  json arr = json::array();
  for (const DatasetChecksum& d : datasets)
    arr.push_back(json{{"path", d.path}, {"bytes", d.bytes}, {"fnv1a64", d.fnv1a64}});
  return arr.dump(2) + '\n';
}

void print_counts(const std::string& what, const std::vector<Claim>& claims) {
  const LabelCounts c = count_labels(claims);
  std::cout << what << ": " << c.total() << " claims (" << c.false_count << " False / " << c.true_count << " True";
  if (c.unlabeled > 0) std::cout << " / " << c.unlabeled << " unlabeled";
  std::cout << ")\n";
}

void print_metrics(const MetricBundle& m) {
  std::cout << std::fixed << std::setprecision(3) << "accuracy " << m.accuracy << "  f1_macro " << m.f1_macro
            << "  f1_binary " << m.f1_false << '\n';
  std::cout.unsetf(std::ios::floatfield);
}

// Grounding record shared by `ground` and `score`.
json grounded_json(const RunConfig& cfg, const std::vector<std::vector<std::string>>& evidence,
                   const std::optional<std::vector<std::size_t>>& folds, const std::string& unit) {
  const PipelineConfig& p = cfg.pipeline;
  return json{{"format", kGroundedFormat},
              {"version", 1},
              {"scorer", std::string(to_string(cfg.scorer))},
              {"bridge", cfg.bridge_address},
              {"grounding", to_json(p.grounding)},
              {"perplexity_unit", unit},
              {"ground_per_fold", folds.has_value()},
              {"k", folds ? json(p.calibration.k) : json(nullptr)},
              {"seed", folds ? json(p.calibration.seed) : json(nullptr)},
              {"folds", folds ? json(*folds) : json(nullptr)},
              {"evidence", evidence}};
}

std::vector<bool> no_evidence_flags(const std::vector<EvidenceSet>& sets) {
  std::vector<bool> flags;
  for (const EvidenceSet& s : sets) flags.push_back(s.empty());
  return flags;
}

std::string scores_jsonl(const std::vector<Claim>& claims, const std::vector<double>& ppl,
                         const std::vector<bool>& no_evidence, const std::optional<std::vector<std::size_t>>& folds) {
  std::string out;
  for (std::size_t i = 0; i < claims.size(); ++i) {
    json row{{"claim_id", claims[i].id}, {"ppl", ppl[i]}, {"no_evidence", static_cast<bool>(no_evidence[i])}};
    if (folds) row["fold"] = (*folds)[i];
    out += row.dump() + '\n';
  }
  return out;
}

// ------------------------------------------------------------- subcommands

int cmd_ingest(const Flags& f) {
  RunConfig cfg = resolve_config(f, false);
  const std::vector<Claim> claims = load_input_claims(cfg);
  const std::vector<SourceDocument> corpus = load_input_corpus(cfg);
  const fs::path dir = cfg.output_dir;
  write_text(dir / "claims.jsonl", claims_to_jsonl(claims));
  write_text(dir / "corpus.jsonl", corpus_to_jsonl(corpus));
  write_text(dir / "datasets.json", datasets_json({checksum_file(cfg.claims_path), checksum_file(cfg.corpus_path)}));
  save_run_config(cfg);
  print_counts(cfg.claims_path, claims);
  std::cout << cfg.corpus_path << ": " << corpus.size() << " documents, " << segment_corpus(corpus).size()
            << " sentences\n";
  return 0;
}

TfIdfIndex build_stage_index(const RunConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  const std::vector<SourceDocument> corpus =
      cfg.corpus_path.empty() || fs::exists(dir / "corpus.jsonl")
          ? load_corpus(require_file(dir / "corpus.jsonl", "run `debunk ingest` first"))
          : load_corpus(cfg.corpus_path);
  return TfIdfIndex::build(segment_corpus(corpus), cfg.pipeline.retrieval.terms);
}

int cmd_index_build(const Flags& f) {
  RunConfig cfg = resolve_config(f, true);
  const fs::path path = f.index ? fs::path(*f.index) : fs::path(cfg.output_dir) / "index.json";
  const TfIdfIndex index = build_stage_index(cfg);
  index.save(path);
  save_run_config(cfg);
  std::cout << path.string() << ": " << index.sentence_count() << " sentences, " << index.vocabulary_size()
            << " terms\n";
  return 0;
}

int cmd_index_query(const Flags& f) {
  const RunConfig cfg = resolve_config(f, true);
  const fs::path path = f.index ? fs::path(*f.index) : fs::path(cfg.output_dir) / "index.json";
  const TfIdfIndex index = TfIdfIndex::load(require_file(path, "run `debunk index build` first"));
  for (const ScoredCandidate& c : index.top_candidates(*f.query, f.k.value_or(cfg.pipeline.retrieval.top_k)))
    std::cout << to_json(c).dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  return 0;
}

int cmd_retrieve(const Flags& f) {
  const RunConfig cfg = resolve_config(f, true, f.k);
  const fs::path dir = cfg.output_dir;
  const std::vector<Claim> claims = stage_claims(dir);
  const fs::path index_path = dir / "index.json";
  std::optional<TfIdfIndex> index;
  if (fs::exists(index_path)) {
    index = TfIdfIndex::load(index_path);
  } else {
    index = build_stage_index(cfg);
    index->save(index_path);
  }
  const std::vector<EvidenceSet> sets =
      select_evidence(claims, *index, cfg.pipeline.retrieval, cfg.pipeline.filter, cfg.pipeline.jobs);
  write_text(dir / "evidence.jsonl", to_jsonl(sets));
  write_text(dir / "audit.jsonl", audit_jsonl(sets));
  save_run_config(cfg);

  std::size_t kept = 0, rejected = 0, empty = 0;
  for (const EvidenceSet& s : sets) {
    kept += s.evidence.size();
    rejected += s.rejected.size();
    empty += s.empty() ? 1 : 0;
  }
  std::cout << claims.size() << " claims: " << kept << " evidence sentences kept, " << rejected << " rejected, "
            << empty << " claims without evidence\n";
  return 0;
}

std::vector<EvidenceSet> stage_evidence(const fs::path& dir) {
  std::vector<EvidenceSet> sets;
  for (const json& row : read_jsonl(require_file(dir / "evidence.jsonl", "run `debunk retrieve` first")))
    sets.push_back(evidence_set_from_json(row));
  return sets;
}

std::vector<std::size_t> folds_for(const std::vector<Claim>& claims, const PipelineConfig& p) {
  std::vector<Label> golds;
  for (const Claim& c : claims) {
    if (!c.label) throw DataError("claim \"" + c.id + "\" has no gold label; per-fold grounding needs labels");
    golds.push_back(*c.label);
  }
  return assign_folds(golds, p.calibration.k, p.calibration.seed);
}

int cmd_ground(const Flags& f) {
  RunConfig cfg = resolve_config(f, true);
  const fs::path dir = cfg.output_dir;
  const std::vector<Claim> claims = stage_claims(dir);
  const std::vector<EvidenceSet> sets = stage_evidence(dir);
  if (sets.size() != claims.size()) throw DataError("evidence.jsonl does not match claims.jsonl; rerun retrieve");

  const PipelineConfig p = cfg.resolved_pipeline(cfg.pipeline.ground_per_fold);
  std::vector<std::vector<std::string>> evidence;
  std::optional<std::vector<std::size_t>> folds;
  if (p.ground_per_fold) {
    folds = folds_for(claims, p);
    for (std::size_t fold = 0; fold < p.calibration.k; ++fold) {
      std::vector<EvidenceSet> fold_sets;
      for (std::size_t i = 0; i < claims.size(); ++i)
        if ((*folds)[i] == fold) fold_sets.push_back(sets[i]);
      evidence.push_back(aggregate_evidence(fold_sets));
    }
  } else {
    evidence.push_back(aggregate_evidence(sets));
  }

  // Ground once now so configuration and bridge problems surface at this stage.
  std::unique_ptr<Scorer> scorer = scorer_factory(cfg)();
  scorer->ground(evidence.front(), p.grounding);
  write_text(dir / "grounded.json", grounded_json(cfg, evidence, folds, scorer->perplexity_unit()).dump(2) + '\n');
  save_run_config(cfg);

  std::size_t total = 0;
  for (const auto& e : evidence) total += e.size();
  std::cout << "grounded " << to_string(cfg.scorer) << " scorer on " << total << " evidence sentences";
  if (folds) std::cout << " across " << evidence.size() << " folds";
  std::cout << '\n';
  return 0;
}

int cmd_score(const Flags& f) {
  RunConfig cfg = resolve_config(f, true);
  const fs::path dir = cfg.output_dir;
  const std::vector<Claim> claims = stage_claims(dir);
  if (!fs::exists(dir / "grounded.json")) throw NotGroundedError();
  const json grounded = read_json(dir / "grounded.json");
  if (grounded.value("format", "") != kGroundedFormat) throw DataError(dir.string() + "/grounded.json: unknown format");

  RunConfig scoring = cfg;
  scoring.scorer = parse_scorer_kind(grounded.at("scorer").get<std::string>());
  if (scoring.scorer == ScorerKind::External && !f.bridge) scoring.bridge_address = grounded.at("bridge").get<std::string>();
  const GroundingConfig gcfg = grounding_config_from_json(grounded.at("grounding"));
  const auto evidence = grounded.at("evidence").get<std::vector<std::vector<std::string>>>();

  std::vector<bool> no_evidence(claims.size(), false);
  if (fs::exists(dir / "evidence.jsonl")) {
    const std::vector<EvidenceSet> sets = stage_evidence(dir);
    if (sets.size() == claims.size()) no_evidence = no_evidence_flags(sets);
  }

  std::vector<double> ppl(claims.size(), 0.0);
  std::optional<std::vector<std::size_t>> folds;
  const ScorerFactory make = scorer_factory(scoring);
  if (grounded.at("folds").is_null()) {
    std::unique_ptr<Scorer> scorer = make();
    scorer->ground(evidence.at(0), gcfg);
    ppl = score_claims(claims, *scorer, cfg.pipeline.jobs);
  } else {
    folds = grounded.at("folds").get<std::vector<std::size_t>>();
    if (folds->size() != claims.size()) throw DataError("grounded.json folds do not match claims.jsonl");
    for (std::size_t fold = 0; fold < evidence.size(); ++fold) {
      std::vector<Claim> members;
      std::vector<std::size_t> positions;
      for (std::size_t i = 0; i < claims.size(); ++i)
        if ((*folds)[i] == fold) {
          members.push_back(claims[i]);
          positions.push_back(i);
        }
      std::unique_ptr<Scorer> scorer = make();
      scorer->ground(evidence[fold], gcfg);
      const std::vector<double> fold_ppl = score_claims(members, *scorer, cfg.pipeline.jobs);
      for (std::size_t j = 0; j < positions.size(); ++j) ppl[positions[j]] = fold_ppl[j];
    }
  }
  write_text(dir / "scores.jsonl", scores_jsonl(claims, ppl, no_evidence, folds));
  save_run_config(cfg);
  std::cout << "scored " << claims.size() << " claims\n";
  return 0;
}

struct StageScores {
  std::vector<double> ppl;
  std::vector<bool> no_evidence;
  std::optional<std::vector<std::size_t>> folds;
};

StageScores stage_scores(const fs::path& dir, const std::vector<Claim>& claims) {
  const fs::path path = dir / "scores.jsonl";
  if (!fs::exists(path)) {
    if (!fs::exists(dir / "grounded.json")) throw NotGroundedError();
    throw DataError(path.string() + " not found; run `debunk score` first");
  }
  const std::vector<json> rows = read_jsonl(path);
  if (rows.size() != claims.size()) throw DataError(path.string() + ": expected one row per claim");
  StageScores s;
  std::vector<std::size_t> folds;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].at("claim_id").get<std::string>() != claims[i].id)
      throw DataError(path.string(), i + 1, "claim id does not match claims.jsonl");
    s.ppl.push_back(rows[i].at("ppl").get<double>());
    s.no_evidence.push_back(rows[i].value("no_evidence", false));
    if (rows[i].contains("fold")) folds.push_back(rows[i].at("fold").get<std::size_t>());
  }
  if (!folds.empty()) s.folds = std::move(folds);
  return s;
}

void write_classification(const fs::path& dir, const Classification& c) {
  write_text(dir / "verdicts.jsonl", to_jsonl(c.verdicts));
  if (c.calibration) {
    write_text(dir / "calibration.json", to_json(*c.calibration).dump(2) + '\n');
  } else {
    std::error_code ec;
    fs::remove(dir / "calibration.json", ec);
  }
}

int cmd_calibrate(const Flags& f) {
  RunConfig cfg = resolve_config(f, true);
  const fs::path dir = cfg.output_dir;
  const PipelineConfig p = cfg.resolved_pipeline(true);
  const std::vector<Claim> claims = stage_claims(dir);
  const StageScores s = stage_scores(dir, claims);

  std::optional<std::span<const std::size_t>> folds;
  if (s.folds && !p.fixed_threshold) {
    const json grounded = read_json(dir / "grounded.json");
    if (grounded.at("k").get<std::size_t>() != p.calibration.k || grounded.at("seed").get<std::uint64_t>() != p.calibration.seed)
      throw ConfigError("per-fold grounding used k=" + grounded.at("k").dump() + " seed=" + grounded.at("seed").dump() +
                        "; calibrate with the same values");
    folds = std::span<const std::size_t>(*s.folds);
  }
  const Classification c = classify_scored(claims, s.ppl, s.no_evidence, p, folds);
  write_classification(dir, c);
  save_run_config(cfg);
  if (c.calibration) {
    std::cout << "k=" << c.calibration->k << " thresholds:";
    for (double th : c.calibration->per_fold_threshold) std::cout << ' ' << th;
    std::cout << '\n';
    print_metrics(c.calibration->averaged_metrics);
  } else {
    std::cout << "classified " << claims.size() << " claims at threshold " << *p.fixed_threshold << '\n';
  }
  return 0;
}

int cmd_report(const Flags& f) {
  RunConfig cfg = resolve_config(f, true);
  const fs::path dir = cfg.output_dir;
  const std::vector<Claim> claims = stage_claims(dir);

  PipelineResult run;
  for (const json& row : read_jsonl(require_file(dir / "verdicts.jsonl", "run `debunk calibrate` first")))
    run.verdicts.push_back(verdict_from_json(row));
  if (run.verdicts.size() != claims.size()) throw DataError("verdicts.jsonl does not match claims.jsonl");
  if (fs::exists(dir / "calibration.json")) run.calibration = calibration_from_json(read_json(dir / "calibration.json"));
  std::string scorer = std::string(to_string(cfg.scorer));
  if (fs::exists(dir / "grounded.json")) {
    const json grounded = read_json(dir / "grounded.json");
    run.perplexity_unit = grounded.value("perplexity_unit", "");
    scorer = grounded.value("scorer", scorer);
  }
  const RunReport report = make_report(claims, run, to_json(cfg), stage_datasets(dir), scorer);
  emit_report(report, dir);
  std::cout << "wrote " << (dir / "report.md").string() << '\n';
  if (report.metrics) print_metrics(*report.metrics);
  return 0;
}

void write_run_artifacts(const fs::path& dir, const std::vector<Claim>& claims, const PipelineResult& run,
                         const RunConfig& cfg) {
  write_text(dir / "claims.jsonl", claims_to_jsonl(claims));
  write_text(dir / "evidence.jsonl", to_jsonl(run.evidence_sets));
  write_text(dir / "audit.jsonl", audit_jsonl(run.evidence_sets));
  std::optional<std::vector<std::size_t>> folds;
  if (cfg.pipeline.ground_per_fold && run.calibration) {
    folds.emplace();
    for (const auto& [id, fold] : run.calibration->fold_assignments) folds->push_back(fold);
  }
  write_text(dir / "grounded.json", grounded_json(cfg, run.grounding, folds, run.perplexity_unit).dump(2) + '\n');
  write_text(dir / "scores.jsonl", scores_jsonl(claims, run.perplexities, no_evidence_flags(run.evidence_sets), folds));
  write_classification(dir, Classification{run.verdicts, run.calibration});
}

int cmd_evaluate(const Flags& f, bool ablate) {
  RunConfig cfg = resolve_config(f, false);
  const PipelineConfig p = cfg.resolved_pipeline(true);
  const std::vector<Claim> claims = load_input_claims(cfg);
  const std::vector<SourceDocument> corpus = load_input_corpus(cfg);
  const std::vector<DatasetChecksum> datasets = {checksum_file(cfg.claims_path), checksum_file(cfg.corpus_path)};
  const fs::path dir = cfg.output_dir;
  const ScorerFactory make = scorer_factory(cfg);

  std::optional<AblationResult> ablation;
  PipelineResult run;
  if (ablate) {
    ablation = ablation_filtering(claims, corpus, p, make);
    run = ablation->after_run;
    write_text(dir / "before" / "verdicts.jsonl", to_jsonl(ablation->before_run.verdicts));
    write_text(dir / "before" / "audit.jsonl", audit_jsonl(ablation->before_run.evidence_sets));
  } else {
    run = run_pipeline(claims, corpus, p, make);
  }

  write_text(dir / "datasets.json", datasets_json(datasets));
  write_text(dir / "corpus.jsonl", corpus_to_jsonl(corpus));
  write_run_artifacts(dir, claims, run, cfg);
  save_run_config(cfg);

  RunReport report = make_report(claims, run, to_json(cfg), datasets, std::string(to_string(cfg.scorer)));
  report.ablation = std::move(ablation);
  emit_report(report, dir);

  print_counts(cfg.claims_path, claims);
  if (report.ablation) {
    std::cout << "before filtering: ";
    print_metrics(report.ablation->before);
    std::cout << "after filtering:  ";
    print_metrics(report.ablation->after);
  } else if (report.metrics) {
    print_metrics(*report.metrics);
  }
  std::cout << "wrote " << (dir / "report.md").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised claim debunking with evidence-grounded language model perplexity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "debunk 0.1.0");
  bool quiet = false;
  app.add_flag("--quiet,-q", quiet, "Suppress informational log messages");
  app.fallthrough();

  Flags f;

  CLI::App* ingest = app.add_subcommand("ingest", "Load and validate claims and corpus into the output directory");
  add_out(ingest, f);
  add_inputs(ingest, f);

  CLI::App* index = app.add_subcommand("index", "Build or query the TF-IDF sentence index");
  index->require_subcommand(1);
  CLI::App* index_build = index->add_subcommand("build", "Segment the corpus and build index.json");
  add_out(index_build, f);
  index_build->add_option("--corpus", f.corpus, "Corpus JSONL (default: ingested corpus)");
  index_build->add_option("--index", f.index, "Index file (default <out>/index.json)");
  add_terms(index_build, f);
  CLI::App* index_query = index->add_subcommand("query", "Print the top candidates for a text as JSONL");
  add_out(index_query, f);
  index_query->add_option("--index", f.index, "Index file (default <out>/index.json)");
  index_query->add_option("--text", f.query, "Query text")->required();
  index_query->add_option("--k", f.k, "Number of candidates (default 10)");

  CLI::App* retrieve = app.add_subcommand("retrieve", "Select and filter evidence for every claim");
  add_out(retrieve, f);
  retrieve->add_option("--k", f.k, "Candidates retrieved per claim before filtering (default 10)");
  add_terms(retrieve, f);
  add_filter(retrieve, f);
  add_jobs(retrieve, f);

  CLI::App* ground = app.add_subcommand("ground", "Ground the scorer on the aggregated evidence");
  add_out(ground, f);
  add_grounding(ground, f);
  add_scorer(ground, f);
  add_calibration(ground, f, "Folds, with --ground-per-fold");

  CLI::App* score = app.add_subcommand("score", "Perplexity of every claim under the grounded scorer");
  add_out(score, f);
  score->add_option("--bridge", f.bridge, "Override the recorded bridge address")->envname("DEBUNK_BRIDGE");
  add_jobs(score, f);

  CLI::App* calibrate = app.add_subcommand("calibrate", "Cross-validate the threshold and classify claims");
  add_out(calibrate, f);
  add_calibration(calibrate, f, "Number of folds (default 4)");

  CLI::App* report = app.add_subcommand("report", "Write report.json, report.md and sweep.csv");
  add_out(report, f);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Run the full chain and write every artifact");
  CLI::App* ablate = app.add_subcommand("ablate", "Full chain with and without evidence filtering");
  for (CLI::App* cmd : {evaluate, ablate}) {
    add_out(cmd, f);
    add_inputs(cmd, f);
    cmd->add_option("--top-k", f.top_k, "Candidates retrieved per claim before filtering (default 10)");
    add_terms(cmd, f);
    add_filter(cmd, f);
    add_grounding(cmd, f);
    add_scorer(cmd, f);
    add_calibration(cmd, f, "Number of folds (default 4)");
    add_jobs(cmd, f);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (quiet) {
    set_log_sink([](LogLevel level, std::string_view message) {
      if (level == LogLevel::Warning) std::cerr << "warning: " << message << '\n';
    });
  }

  try {
    if (*ingest) return cmd_ingest(f);
    if (*index_build) return cmd_index_build(f);
    if (*index_query) return cmd_index_query(f);
    if (*retrieve) return cmd_retrieve(f);
    if (*ground) return cmd_ground(f);
    if (*score) return cmd_score(f);
    if (*calibrate) return cmd_calibrate(f);
    if (*report) return cmd_report(f);
    if (*evaluate) return cmd_evaluate(f, false);
    if (*ablate) return cmd_evaluate(f, true);
  } catch (const ConfigError& e) {
    std::cerr << "debunk: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BridgeError& e) {
    std::cerr << "debunk: " << e.what() << '\n';
    return kExitBridge;
  } catch (const std::exception& e) {
    std::cerr << "debunk: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
