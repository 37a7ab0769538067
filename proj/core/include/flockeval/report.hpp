/* Copyright 2026 The Flockeval Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef FLOCKEVAL_REPORT_HPP_
#define FLOCKEVAL_REPORT_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flockeval/folds.hpp"
#include "flockeval/matching.hpp"
#include "flockeval/metrics.hpp"
#include "flockeval/schema.hpp"

namespace flockeval {

struct EvaluateConfig {
  IouMode mode = IouMode::BBox;
  std::vector<double> extra_alphas;  // reported besides the standard ten
  // Pairing threshold for the label views (confusion matrices, F1, PR).
  double cls_alpha = 0.5;
  int iou_resolution = kDefaultIouResolution;
  int threads = 0;
};

// Score-free greedy pairing outcome at one threshold.
struct MatchCounts {
  double alpha = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

// Everything one evaluation run produces. Detection AP uses the ranked
// score-sweep protocol; the counts table uses the score-free greedy
// pairing; label views pair at cls_alpha and then compare class labels.
struct MetricReport {
  IouMode mode = IouMode::BBox;
  std::int64_t total_gt = 0;
  std::int64_t total_predictions = 0;

  APResult detection;
  std::vector<MatchCounts> counts;  // per reported alpha, ascending

  double cls_alpha = 0.5;
  std::int64_t posture_pairs = 0;
  std::optional<ClassificationReport> posture;  // binary: STA, WLK
  ConfusionMatrix posture_cm;

  std::int64_t behavior_pairs = 0;
  std::optional<ClassificationReport> behavior;  // seven classes
  ConfusionMatrix behavior_cm;

  // One-vs-rest curves for behavior classes with at least one positive.
  std::vector<std::pair<std::string, PRCurve>> behavior_curves;
};

// Full evaluation of one prediction set against ground truth. Throws
// EmptyGroundTruth without matchable ground truth and EmptyIntersection
// when predictions exist but none lands on a known (video, frame).
MetricReport evaluate_dataset(std::span<const FrameAnnotation> annotations,
                              std::span<const Prediction> predictions,
                              const EvaluateConfig& cfg);

std::string serialize_report_json(const MetricReport& report);

// One row per labeled result, columns AP:<alpha>... plus coco_map.
std::string detection_csv(
    std::span<const std::pair<std::string, const MetricReport*>> rows);

// Long-form class table: view, class, precision, recall, f1, support, plus
// accuracy / macro / weighted summary rows per view.
std::string classification_csv(const MetricReport& report);

// class, score_threshold, recall, precision rows for external plotting.
std::string pr_curves_csv(const MetricReport& report);

struct FoldOutcome {
  std::vector<std::optional<MetricReport>> reports;  // slot per fold
  bool incomplete = false;  // true when any fold had no predictions
  int folds_present = 0;

  // Unweighted means over present folds.
  std::vector<std::pair<double, double>> mean_ap;  // (alpha, mean AP)
  double mean_coco_map = 0.0;
  std::optional<double> mean_posture_accuracy;
  std::optional<double> mean_posture_macro_f1;
  std::optional<double> mean_posture_weighted_f1;
  std::optional<double> mean_behavior_accuracy;
  std::optional<double> mean_behavior_macro_f1;
  std::optional<double> mean_behavior_weighted_f1;
  std::vector<std::pair<std::string, double>> mean_behavior_class_f1;
};

// Evaluates each fold's predictions against that fold's test videos and
// averages the headline numbers across the folds that have predictions.
// A missing fold (nullopt) marks the outcome incomplete instead of failing.
FoldOutcome fold_evaluate(
    const FoldSpec& spec, std::span<const FrameAnnotation> annotations,
    std::span<const std::optional<std::vector<Prediction>>>
        predictions_per_fold,
    const EvaluateConfig& cfg);

std::string serialize_fold_outcome_json(const FoldOutcome& outcome);
std::string fold_detection_csv(const FoldOutcome& outcome);

// Serialization rounds ratios to four decimals; in-memory values stay full
// precision.
double round_ratio(double value);

}  // namespace flockeval

#endif  // FLOCKEVAL_REPORT_HPP_
