#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "debunk/debunker.hpp"

namespace debunk {

/// Everything needed to reproduce a run. Serialized verbatim into reports.
///
/// JSON layout (every key optional when loading):
///   {"paths": {"claims", "claims_format", "corpus", "output_dir"},
///    "retrieval": {"top_k", "stem", "remove_stop_words"},
///    "filter": {...FilterConfig...},
///    "grounding": {...GroundingConfig...},
///    "scorer": {"kind", "bridge"},
///    "calibration": {"k", "seed", "objective", "preset_thresholds"},
///    "threshold": number|null, "ground_per_fold": bool, "jobs": int}
struct RunConfig {
  std::string claims_path;
  std::string claims_format = "auto";  // auto | jsonl | tsv
  std::string corpus_path;
  std::string output_dir = "debunk-out";

  PipelineConfig pipeline;
  std::optional<std::uint64_t> seed;

  ScorerKind scorer = ScorerKind::Ngram;
  std::string bridge_address;

  /// pipeline with the seed applied. Throws ConfigError when `require_seed`
  /// and no seed was given.
  PipelineConfig resolved_pipeline(bool require_seed) const;

  ClaimFormat resolved_claims_format() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Starts from `base` and overrides whatever `j` specifies.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace debunk
