#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "debunk/debunker.hpp"
#include "debunk/metrics.hpp"

namespace debunk {

inline constexpr int kReportSchemaVersion = 1;

struct DatasetChecksum {
  std::string path;
  std::size_t bytes = 0;
  std::string fnv1a64;  // 16 lowercase hex digits
};

std::string fnv1a64_hex(std::string_view data);
DatasetChecksum checksum_file(const std::filesystem::path& path);

/// Metrics of a finished run: the cross-validated average when calibrated,
/// otherwise metrics over all verdicts (requires gold labels).
MetricBundle run_metrics(const PipelineResult& run);

struct AblationResult {
  MetricBundle before;  // every filter rule disabled
  MetricBundle after;   // filter as configured
  PipelineResult before_run;
  PipelineResult after_run;

  double delta_accuracy() const { return after.accuracy - before.accuracy; }
  double delta_f1_macro() const { return after.f1_macro - before.f1_macro; }
  double delta_f1_binary() const { return after.f1_false - before.f1_false; }
};

/// Runs the pipeline twice, filter rules off and as configured, everything
/// else identical.
AblationResult ablation_filtering(std::span<const Claim> claims, std::span<const SourceDocument> corpus,
                                  const PipelineConfig& cfg, const ScorerFactory& make_scorer);

struct RunReport {
  nlohmann::json config;
  std::vector<DatasetChecksum> datasets;
  std::string scorer;
  std::string perplexity_unit;
  LabelCounts counts;
  std::size_t no_evidence = 0;
  std::optional<MetricBundle> metrics;
  std::optional<CalibrationResult> calibration;
  std::vector<SweepPoint> sweep;
  std::optional<double> fixed_threshold;
  std::optional<AblationResult> ablation;
};

/// Collects metrics, calibration, and a threshold sweep over the default
/// grid from a finished run. Unlabeled runs produce no metrics or sweep.
RunReport make_report(std::span<const Claim> claims, const PipelineResult& run, nlohmann::json config,
                      std::vector<DatasetChecksum> datasets, std::string scorer);

nlohmann::json report_json(const RunReport& report);
std::string report_markdown(const RunReport& report);

/// Writes report.json, report.md and sweep.csv into out_dir (created if
/// needed). Throws Error when the directory is not writable.
void emit_report(const RunReport& report, const std::filesystem::path& out_dir);

}  // namespace debunk
