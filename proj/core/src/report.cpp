#include "debunk/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "debunk/error.hpp"

namespace debunk {

using nlohmann::json;

namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", v * 100.0);
  return buf;
}

std::string signed_points(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f", v * 100.0);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

json ablation_json(const AblationResult& a) {
  return json{{"before", to_json(a.before)},
              {"after", to_json(a.after)},
              {"delta",
               {{"accuracy", a.delta_accuracy()}, {"f1_macro", a.delta_f1_macro()}, {"f1_binary", a.delta_f1_binary()}}}};
}

}  // namespace

std::string fnv1a64_hex(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

DatasetChecksum checksum_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  return DatasetChecksum{path.string(), content.size(), fnv1a64_hex(content)};
}

MetricBundle run_metrics(const PipelineResult& run) {
  if (run.calibration) return run.calibration->averaged_metrics;
  std::vector<Prediction> predictions;
  predictions.reserve(run.verdicts.size());
  for (const Verdict& v : run.verdicts) predictions.push_back(Prediction{v.predicted, v.gold});
  return compute_metrics(predictions);
}

AblationResult ablation_filtering(std::span<const Claim> claims, std::span<const SourceDocument> corpus,
                                  const PipelineConfig& cfg, const ScorerFactory& make_scorer) {
  PipelineConfig unfiltered = cfg;
  unfiltered.filter.enabled = FilterConfig::disabled().enabled;

  AblationResult result;
  result.before_run = run_pipeline(claims, corpus, unfiltered, make_scorer);
  result.after_run = run_pipeline(claims, corpus, cfg, make_scorer);
  result.before = run_metrics(result.before_run);
  result.after = run_metrics(result.after_run);
  return result;
}

RunReport make_report(std::span<const Claim> claims, const PipelineResult& run, json config,
                      std::vector<DatasetChecksum> datasets, std::string scorer) {
  RunReport report;
  report.config = std::move(config);
  report.datasets = std::move(datasets);
  report.scorer = std::move(scorer);
  report.perplexity_unit = run.perplexity_unit;
  report.counts = count_labels(std::vector<Claim>(claims.begin(), claims.end()));
  for (const Verdict& v : run.verdicts) report.no_evidence += v.no_evidence ? 1 : 0;
  report.calibration = run.calibration;
  if (!run.calibration && !run.verdicts.empty()) report.fixed_threshold = run.verdicts.front().threshold;

  const bool labeled = report.counts.unlabeled == 0 && !claims.empty();
  if (labeled) {
    report.metrics = run_metrics(run);
    std::vector<ScoredItem> scored;
    for (const Verdict& v : run.verdicts) scored.push_back(ScoredItem{v.ppl, *v.gold});
    const std::vector<double> grid = default_sweep_grid(scored);
    report.sweep = threshold_sweep(scored, grid);
  }
  return report;
}

json report_json(const RunReport& report) {
  json datasets = json::array();
  for (const DatasetChecksum& d : report.datasets)
    datasets.push_back(json{{"path", d.path}, {"bytes", d.bytes}, {"fnv1a64", d.fnv1a64}});

  json sweep = json::array();
  for (const SweepPoint& p : report.sweep)
    sweep.push_back(json{{"threshold", p.threshold},
                         {"fn", p.fn_count},
                         {"fp", p.fp_count},
                         {"accuracy", p.metrics.accuracy},
                         {"f1_macro", p.metrics.f1_macro},
                         {"f1_binary", p.metrics.f1_false}});

  json calibration = nullptr;
  if (report.calibration) {
    const CalibrationResult& c = *report.calibration;
    json per_fold = json::array();
    for (const MetricBundle& m : c.per_fold_metrics) per_fold.push_back(to_json(m));
    calibration = json{{"k", c.k},
                       {"seed", c.seed},
                       {"objective", std::string(to_string(c.objective))},
                       {"thresholds_preset", c.thresholds_preset},
                       {"per_fold_threshold", c.per_fold_threshold},
                       {"per_fold_metrics", per_fold},
                       {"averaged_metrics", to_json(c.averaged_metrics)}};
  }

  return json{{"schema", "debunk-report"},
              {"schema_version", kReportSchemaVersion},
              {"config", report.config},
              {"datasets", datasets},
              {"scorer", report.scorer},
              {"perplexity_unit", report.perplexity_unit},
              {"claims",
               {{"total", report.counts.total()},
                {"false", report.counts.false_count},
                {"true", report.counts.true_count},
                {"unlabeled", report.counts.unlabeled},
                {"no_evidence", report.no_evidence}}},
              {"metrics", report.metrics ? to_json(*report.metrics) : json(nullptr)},
              {"fixed_threshold", report.fixed_threshold ? json(*report.fixed_threshold) : json(nullptr)},
              {"calibration", calibration},
              {"sweep", sweep},
              {"ablation", report.ablation ? ablation_json(*report.ablation) : json(nullptr)}};
}

std::string report_markdown(const RunReport& report) {
  std::ostringstream md;
  md << "# Debunking report\n\n";
  md << "Scorer: `" << report.scorer << "` (perplexity per " << report.perplexity_unit << ")\n\n";
  md << "Claims: " << report.counts.total() << " (" << report.counts.false_count << " False, "
     << report.counts.true_count << " True, " << report.counts.unlabeled << " unlabeled); "
     << report.no_evidence << " without evidence.\n\n";

  if (report.metrics) {
    md << "## Results\n\n";
    md << "| Model | Accuracy | F1-Macro | F1-Binary |\n";
    md << "|---|---|---|---|\n";
    md << "| LM Debunker (" << report.scorer << ") | " << percent(report.metrics->accuracy) << " | "
       << percent(report.metrics->f1_macro) << " | " << percent(report.metrics->f1_false) << " |\n\n";
    const Confusion& c = report.metrics->confusion;
    md << "Confusion (False = positive): TP " << c.tp << ", FP " << c.fp << ", TN " << c.tn << ", FN " << c.fn
       << "\n\n";
  }

  if (report.calibration) {
    const CalibrationResult& c = *report.calibration;
    md << "## Cross-validation\n\n";
    md << "k = " << c.k << ", seed = " << c.seed << ", objective = " << to_string(c.objective)
       << (c.thresholds_preset ? ", preset thresholds" : "") << "\n\n";
    md << "| Fold | Threshold | Accuracy | F1-Macro | F1-Binary |\n";
    md << "|---|---|---|---|---|\n";
    for (std::size_t f = 0; f < c.k; ++f) {
      const MetricBundle& m = c.per_fold_metrics[f];
      md << "| " << f << " | " << fixed(c.per_fold_threshold[f], 3) << " | " << percent(m.accuracy) << " | "
         << percent(m.f1_macro) << " | " << percent(m.f1_false) << " |\n";
    }
    md << "\n";
  } else if (report.fixed_threshold) {
    md << "Threshold: " << fixed(*report.fixed_threshold, 3) << "\n\n";
  }

  if (report.ablation) {
    const AblationResult& a = *report.ablation;
    md << "## Evidence filtering ablation\n\n";
    md << "| | Acc. | F1-Macro | F1-Binary |\n";
    md << "|---|---|---|---|\n";
    md << "| Before | " << percent(a.before.accuracy) << " | " << percent(a.before.f1_macro) << " | "
       << percent(a.before.f1_false) << " |\n";
    md << "| After | " << percent(a.after.accuracy) << " | " << percent(a.after.f1_macro) << " | "
       << percent(a.after.f1_false) << " |\n";
    md << "| Delta (points) | " << signed_points(a.delta_accuracy()) << " | " << signed_points(a.delta_f1_macro())
       << " | " << signed_points(a.delta_f1_binary()) << " |\n\n";
  }

  if (!report.sweep.empty()) {
    md << "Threshold sweep: " << report.sweep.size() << " points in `sweep.csv` (FN/FP counts per threshold).\n";
  }
  return md.str();
}

void emit_report(const RunReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "report.json", report_json(report).dump(2) + '\n');
  write_file(out_dir / "report.md", report_markdown(report));
  write_file(out_dir / "sweep.csv", sweep_csv(report.sweep));
}

}  // namespace debunk
