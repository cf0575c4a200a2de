#include "debunk/config.hpp"

#include <fstream>

#include "debunk/error.hpp"

namespace debunk {

using nlohmann::json;

PipelineConfig RunConfig::resolved_pipeline(bool require_seed) const {
  if (require_seed && !seed && !pipeline.fixed_threshold)
    throw ConfigError("a seed is required (--seed or calibration.seed in the config file)");
  PipelineConfig out = pipeline;
  if (seed) out.calibration.seed = *seed;
  return out;
}

ClaimFormat RunConfig::resolved_claims_format() const {
  if (claims_format == "auto") return claim_format_for(claims_path);
  if (auto f = parse_claim_format(claims_format)) return *f;
  throw ConfigError("unknown claims format \"" + claims_format + "\" (expected auto, jsonl or tsv)");
}

json to_json(const RunConfig& cfg) {
  const PipelineConfig& p = cfg.pipeline;
  return json{
      {"paths",
       {{"claims", cfg.claims_path},
        {"claims_format", cfg.claims_format},
        {"corpus", cfg.corpus_path},
        {"output_dir", cfg.output_dir}}},
      {"retrieval",
       {{"top_k", p.retrieval.top_k},
        {"stem", p.retrieval.terms.stem},
        {"remove_stop_words", p.retrieval.terms.remove_stop_words}}},
      {"filter", to_json(p.filter)},
      {"grounding", to_json(p.grounding)},
      {"scorer", {{"kind", std::string(to_string(cfg.scorer))}, {"bridge", cfg.bridge_address}}},
      {"calibration",
       {{"k", p.calibration.k},
        {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
        {"objective", std::string(to_string(p.calibration.objective))},
        {"preset_thresholds", p.calibration.preset_thresholds}}},
      {"threshold", p.fixed_threshold ? json(*p.fixed_threshold) : json(nullptr)},
      {"ground_per_fold", p.ground_per_fold},
      {"jobs", p.jobs},
  };
}

RunConfig run_config_from_json(const json& j, RunConfig cfg) {
  try {
    if (j.contains("paths")) {
      const json& paths = j.at("paths");
      if (paths.contains("claims")) cfg.claims_path = paths.at("claims").get<std::string>();
      if (paths.contains("claims_format")) cfg.claims_format = paths.at("claims_format").get<std::string>();
      if (paths.contains("corpus")) cfg.corpus_path = paths.at("corpus").get<std::string>();
      if (paths.contains("output_dir")) cfg.output_dir = paths.at("output_dir").get<std::string>();
    }
    PipelineConfig& p = cfg.pipeline;
    if (j.contains("retrieval")) {
      const json& r = j.at("retrieval");
      if (r.contains("top_k")) p.retrieval.top_k = r.at("top_k").get<std::size_t>();
      if (r.contains("stem")) p.retrieval.terms.stem = r.at("stem").get<bool>();
      if (r.contains("remove_stop_words")) p.retrieval.terms.remove_stop_words = r.at("remove_stop_words").get<bool>();
    }
    if (j.contains("filter")) p.filter = filter_config_from_json(j.at("filter"));
    if (j.contains("grounding")) p.grounding = grounding_config_from_json(j.at("grounding"));
    if (j.contains("scorer")) {
      const json& s = j.at("scorer");
      if (s.contains("kind")) cfg.scorer = parse_scorer_kind(s.at("kind").get<std::string>());
      if (s.contains("bridge")) cfg.bridge_address = s.at("bridge").get<std::string>();
    }
    if (j.contains("calibration")) {
      const json& c = j.at("calibration");
      if (c.contains("k")) p.calibration.k = c.at("k").get<std::size_t>();
      if (c.contains("seed") && !c.at("seed").is_null()) cfg.seed = c.at("seed").get<std::uint64_t>();
      if (c.contains("objective")) p.calibration.objective = parse_objective(c.at("objective").get<std::string>());
      if (c.contains("preset_thresholds"))
        p.calibration.preset_thresholds = c.at("preset_thresholds").get<std::vector<double>>();
    }
    if (j.contains("threshold")) {
      if (j.at("threshold").is_null()) p.fixed_threshold.reset();
      else p.fixed_threshold = j.at("threshold").get<double>();
    }
    if (j.contains("ground_per_fold")) p.ground_per_fold = j.at("ground_per_fold").get<bool>();
    if (j.contains("jobs")) p.jobs = j.at("jobs").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid run config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, std::move(base));
}

}  // namespace debunk
