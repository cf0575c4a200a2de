#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "debunk/data_model.hpp"

namespace debunk {

/// False when the perplexity is strictly above the threshold, True otherwise
/// (a claim exactly at the threshold is True).
constexpr Label classify(double ppl, double threshold) { return ppl > threshold ? Label::False : Label::True; }

/// Confusion counts with False as the positive class.
struct Confusion {
  std::size_t tp = 0;  // gold False, predicted False
  std::size_t fp = 0;  // gold True, predicted False
  std::size_t tn = 0;  // gold True, predicted True
  std::size_t fn = 0;  // gold False, predicted True

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

struct MetricBundle {
  double accuracy = 0.0;
  double f1_macro = 0.0;
  double f1_false = 0.0;  // F1-Binary
  double f1_true = 0.0;
  Confusion confusion;

  bool operator==(const MetricBundle&) const = default;
};

nlohmann::json to_json(const MetricBundle& m);
MetricBundle metric_bundle_from_json(const nlohmann::json& j);

struct Prediction {
  Label predicted;
  std::optional<Label> gold;
};

/// F1 with a zero denominator (class absent from both gold and predictions)
/// is 0, with a logged notice.
MetricBundle metrics_from_confusion(const Confusion& confusion);

/// Throws DataError for an empty input or a prediction without gold.
MetricBundle compute_metrics(std::span<const Prediction> predictions);

/// Unweighted mean of accuracy and F1 scores; confusion counts are summed.
MetricBundle mean_metrics(std::span<const MetricBundle> bundles);

struct ScoredItem {
  double ppl;
  Label gold;
};

struct SweepPoint {
  double threshold;
  std::size_t fn_count;
  std::size_t fp_count;
  MetricBundle metrics;
};

/// One point per grid threshold. Throws std::invalid_argument unless the
/// grid is non-empty and ascending.
std::vector<SweepPoint> threshold_sweep(std::span<const ScoredItem> scored, std::span<const double> grid);

/// Integers 1 .. floor(max ppl) + 1; when that exceeds max_points, max_points
/// evenly spaced values over the same range instead.
std::vector<double> default_sweep_grid(std::span<const ScoredItem> scored, std::size_t max_points = 200);

/// Header: threshold,fn,fp,accuracy,f1_macro,f1_binary
std::string sweep_csv(std::span<const SweepPoint> points);

}  // namespace debunk
