#include "debunk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "debunk/error.hpp"
#include "debunk/log.hpp"

namespace debunk {
namespace {

double f1(std::size_t tp, std::size_t fp, std::size_t fn, const char* label) {
  const std::size_t denominator = 2 * tp + fp + fn;
  if (denominator == 0) {
    log_notice(std::string("F1 for class ") + label + " is undefined (class absent); using 0");
    return 0.0;
  }
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denominator);
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

nlohmann::json to_json(const MetricBundle& m) {
  return nlohmann::json{{"accuracy", m.accuracy},
                        {"f1_macro", m.f1_macro},
                        {"f1_binary", m.f1_false},
                        {"f1_true", m.f1_true},
                        {"confusion",
                         {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}, {"fn", m.confusion.fn}}}};
}

MetricBundle metric_bundle_from_json(const nlohmann::json& j) {
  MetricBundle m;
  m.accuracy = j.at("accuracy").get<double>();
  m.f1_macro = j.at("f1_macro").get<double>();
  m.f1_false = j.at("f1_binary").get<double>();
  m.f1_true = j.at("f1_true").get<double>();
  const auto& c = j.at("confusion");
  m.confusion = Confusion{c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("tn").get<std::size_t>(),
                          c.at("fn").get<std::size_t>()};
  return m;
}

MetricBundle metrics_from_confusion(const Confusion& c) {
  MetricBundle m;
  m.confusion = c;
  const std::size_t total = c.total();
  m.accuracy = total == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
  m.f1_false = f1(c.tp, c.fp, c.fn, "False");
  // For the True class the roles swap: tn are its hits, fn its false alarms.
  m.f1_true = f1(c.tn, c.fn, c.fp, "True");
  m.f1_macro = (m.f1_false + m.f1_true) / 2.0;
  return m;
}

MetricBundle compute_metrics(std::span<const Prediction> predictions) {
  if (predictions.empty()) throw DataError("cannot compute metrics over zero predictions");
  Confusion c;
  for (const Prediction& p : predictions) {
    if (!p.gold) throw DataError("prediction without a gold label");
    const bool gold_false = *p.gold == Label::False;
    const bool pred_false = p.predicted == Label::False;
    if (gold_false && pred_false) ++c.tp;
    else if (!gold_false && pred_false) ++c.fp;
    else if (!gold_false && !pred_false) ++c.tn;
    else ++c.fn;
  }
  return metrics_from_confusion(c);
}

MetricBundle mean_metrics(std::span<const MetricBundle> bundles) {
  if (bundles.empty()) throw std::invalid_argument("mean of zero metric bundles");
  MetricBundle mean;
  for (const MetricBundle& b : bundles) {
    mean.accuracy += b.accuracy;
    mean.f1_macro += b.f1_macro;
    mean.f1_false += b.f1_false;
    mean.f1_true += b.f1_true;
    mean.confusion.tp += b.confusion.tp;
    mean.confusion.fp += b.confusion.fp;
    mean.confusion.tn += b.confusion.tn;
    mean.confusion.fn += b.confusion.fn;
  }
  const double n = static_cast<double>(bundles.size());
  mean.accuracy /= n;
  mean.f1_macro /= n;
  mean.f1_false /= n;
  mean.f1_true /= n;
  return mean;
}

std::vector<SweepPoint> threshold_sweep(std::span<const ScoredItem> scored, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("threshold grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("threshold grid must be ascending");
  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (double threshold : grid) {
    Confusion c;
    for (const ScoredItem& item : scored) {
      const bool pred_false = classify(item.ppl, threshold) == Label::False;
      const bool gold_false = item.gold == Label::False;
      if (gold_false && pred_false) ++c.tp;
      else if (!gold_false && pred_false) ++c.fp;
      else if (!gold_false && !pred_false) ++c.tn;
      else ++c.fn;
    }
    points.push_back(SweepPoint{threshold, c.fn, c.fp, metrics_from_confusion(c)});
  }
  return points;
}

std::vector<double> default_sweep_grid(std::span<const ScoredItem> scored, std::size_t max_points) {
  if (max_points < 2) throw std::invalid_argument("max_points must be at least 2");
  double max_ppl = 1.0;
  for (const ScoredItem& item : scored) max_ppl = std::max(max_ppl, item.ppl);
  const double upper = std::floor(max_ppl) + 1.0;
  std::vector<double> grid;
  if (upper <= static_cast<double>(max_points)) {
    for (double t = 1.0; t <= upper; t += 1.0) grid.push_back(t);
    return grid;
  }
  const double step = (upper - 1.0) / static_cast<double>(max_points - 1);
  for (std::size_t i = 0; i < max_points; ++i) grid.push_back(1.0 + step * static_cast<double>(i));
  grid.back() = upper;
  return grid;
}

std::string sweep_csv(std::span<const SweepPoint> points) {
  std::string out = "threshold,fn,fp,accuracy,f1_macro,f1_binary\n";
  for (const SweepPoint& p : points) {
    out += format_number(p.threshold) + ',' + std::to_string(p.fn_count) + ',' + std::to_string(p.fp_count) + ',' +
           format_number(p.metrics.accuracy) + ',' + format_number(p.metrics.f1_macro) + ',' +
           format_number(p.metrics.f1_false) + '\n';
  }
  return out;
}

}  // namespace debunk
