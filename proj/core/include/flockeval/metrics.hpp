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
#ifndef FLOCKEVAL_METRICS_HPP_
#define FLOCKEVAL_METRICS_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flockeval/matching.hpp"
#include "flockeval/schema.hpp"

namespace flockeval {

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
  double score_threshold = 0.0;

  friend bool operator==(const PRPoint&, const PRPoint&) = default;
};

// One point per distinct score threshold, recall non-decreasing.
struct PRCurve {
  std::vector<PRPoint> points;

  friend bool operator==(const PRCurve&, const PRCurve&) = default;
};

enum class Interpolation {
  Coco101,   // precision envelope sampled at recall 0.00, 0.01, ..., 1.00
  AllPoint,  // exact area under the precision envelope
};

double average_precision(const PRCurve& curve,
                         Interpolation interp = Interpolation::Coco101);

// One detection after ranking: its confidence and whether it hit an unused
// ground truth at the evaluation threshold.
struct RankedDetection {
  double score = 0.0;
  bool true_positive = false;
};

// Ranked-detection protocol: predictions sorted by descending score
// (original order on ties), each greedily taking the best still-unused
// ground truth in its frame with IoU strictly above alpha. This is the
// score-swept protocol behind AP; the score-free greedy pairing lives in
// match_frame and the two are never mixed in one table.
std::vector<RankedDetection> rank_detections(
    std::span<const FrameAnnotation> annotations,
    std::span<const Prediction> predictions, double alpha, IouMode mode,
    int iou_resolution = kDefaultIouResolution, int threads = 0);

// Builds the PR curve from ranked detections. total_gt counts matchable
// ground truths; zero throws EmptyGroundTruth.
PRCurve detection_pr(std::span<const RankedDetection> ranked,
                     std::int64_t total_gt);

// The ten standard evaluation thresholds 0.50, 0.55, ..., 0.95.
std::span<const double> standard_iou_thresholds();

struct APResult {
  // (alpha, AP), ascending alpha: the ten standard thresholds plus any
  // extra requested ones.
  std::vector<std::pair<double, double>> per_threshold;
  double coco_map = 0.0;  // mean over the ten standard thresholds only
  IouMode mode = IouMode::BBox;

  double ap_at(double alpha) const;  // exact lookup; throws when absent
};

APResult coco_evaluate(std::span<const FrameAnnotation> annotations,
                       std::span<const Prediction> predictions, IouMode mode,
                       std::span<const double> extra_alphas = {},
                       int iou_resolution = kDefaultIouResolution,
                       int threads = 0);

struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::int64_t>> counts;  // counts[gt][pred]

  std::int64_t total() const;
  std::int64_t row_sum(std::size_t i) const;
  std::int64_t col_sum(std::size_t j) const;

  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const std::string> gt_labels,
                          std::span<const std::string> pred_labels,
                          std::span<const std::string> classes);

struct ClassificationReport {
  std::vector<std::string> classes;
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;  // 0 when precision + recall is 0
  std::vector<std::int64_t> supports;  // ground-truth row sums
  double macro_f1 = 0.0;     // unweighted mean over classes
  double weighted_f1 = 0.0;  // support-weighted mean
};

ClassificationReport classification_report(const ConfusionMatrix& cm);

// One-vs-rest sweep over per-sample scores: at each distinct score s the
// samples with score >= s are predicted positive.
PRCurve one_vs_rest_pr(std::span<const double> scores,
                       std::span<const std::uint8_t> positives);

// One-vs-rest curve for one class of a single-label classifier: a sample
// counts as predicted-positive at threshold s when its label equals
// positive_class and its score >= s. Throws EmptyGroundTruth when no sample
// has positive_class as ground truth.
PRCurve label_pr(std::span<const std::string> gt_labels,
                 std::span<const std::string> pred_labels,
                 std::span<const double> scores,
                 std::string_view positive_class);

// SIT and STD collapse to STA; WLK and STA pass through. Behavior labels
// are rejected with SchemaError.
std::string_view binarize_posture_label(std::string_view label);

}  // namespace flockeval

#endif  // FLOCKEVAL_METRICS_HPP_
