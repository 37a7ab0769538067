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
#include "flockeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "flockeval/errors.hpp"
#include "flockeval/parallel.hpp"

namespace flockeval {

namespace {

constexpr std::array<double, 10> kStandardThresholds = {
    0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};

// Per-frame detection state shared by all thresholds: the IoU matrix and
// the frame's predictions in rank order.
struct FrameDetections {
  std::size_t gt_count = 0;
  std::vector<std::size_t> pred_global;  // score desc, then global index
  std::vector<double> iou;               // [pred_local * gt_count + gt]
};

struct DetectionSweep {
  std::vector<FrameDetections> frames;
  std::vector<std::size_t> global_rank;  // all predictions, score desc
  std::vector<double> scores;            // by global prediction index
  std::int64_t total_gt = 0;
};

DetectionSweep build_sweep(std::span<const FrameAnnotation> annotations,
                           std::span<const Prediction> predictions,
                           IouMode mode, int iou_resolution, int threads) {
  DetectionSweep sweep;
  sweep.frames.resize(annotations.size());
  sweep.scores.resize(predictions.size());
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    sweep.scores[p] = predictions[p].score;
  }

  std::map<FrameKey, std::size_t> frame_of;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    frame_of[FrameKey{annotations[i].video_id, annotations[i].frame_index}] =
        i;
  }
  std::vector<std::vector<std::size_t>> preds_per_frame(annotations.size());
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    const auto it = frame_of.find(
        FrameKey{predictions[p].video_id, predictions[p].frame_index});
    if (it != frame_of.end()) preds_per_frame[it->second].push_back(p);
  }

  MatchConfig iou_cfg;
  iou_cfg.mode = mode;
  iou_cfg.iou_resolution = iou_resolution;

  parallel_for(annotations.size(), threads, [&](std::size_t i) {
    const FrameAnnotation& frame = annotations[i];
    FrameDetections& fd = sweep.frames[i];

    std::vector<GtGeometry> gt;
    for (const BirdAnnotation& bird : frame.birds) {
      if (bird.matchable()) gt.push_back(gt_geometry(bird));
    }
    fd.gt_count = gt.size();

    fd.pred_global = preds_per_frame[i];
    std::stable_sort(fd.pred_global.begin(), fd.pred_global.end(),
                     [&](std::size_t a, std::size_t b) {
                       return predictions[a].score > predictions[b].score;
                     });
    fd.iou.resize(fd.pred_global.size() * fd.gt_count);
    for (std::size_t p = 0; p < fd.pred_global.size(); ++p) {
      const Prediction& pred = predictions[fd.pred_global[p]];
      for (std::size_t g = 0; g < fd.gt_count; ++g) {
        fd.iou[p * fd.gt_count + g] = pair_iou(gt[g], pred, iou_cfg);
      }
    }
  });

  for (const FrameDetections& fd : sweep.frames) {
    sweep.total_gt += static_cast<std::int64_t>(fd.gt_count);
  }
  sweep.global_rank.resize(predictions.size());
  std::iota(sweep.global_rank.begin(), sweep.global_rank.end(), 0);
  std::stable_sort(sweep.global_rank.begin(), sweep.global_rank.end(),
                   [&](std::size_t a, std::size_t b) {
                     return sweep.scores[a] > sweep.scores[b];
                   });
  return sweep;
}

// Greedy rank-order matching for one threshold: every prediction, highest
// score first, takes the unused ground truth with the best IoU strictly
// above alpha (ties broken toward the lowest gt index).
std::vector<RankedDetection> sweep_at(const DetectionSweep& sweep,
                                      double alpha) {
  std::vector<std::uint8_t> tp(sweep.scores.size(), 0);
  for (const FrameDetections& fd : sweep.frames) {
    std::vector<char> used(fd.gt_count, 0);
    for (std::size_t p = 0; p < fd.pred_global.size(); ++p) {
      int best = -1;
      double best_iou = 0.0;
      for (std::size_t g = 0; g < fd.gt_count; ++g) {
        if (used[g]) continue;
        const double iou = fd.iou[p * fd.gt_count + g];
        if (iou <= alpha) continue;
        if (best == -1 || iou > best_iou) {
          best = static_cast<int>(g);
          best_iou = iou;
        }
      }
      if (best >= 0) {
        used[best] = 1;
        tp[fd.pred_global[p]] = 1;
      }
    }
  }
  std::vector<RankedDetection> ranked;
  ranked.reserve(sweep.global_rank.size());
  for (std::size_t idx : sweep.global_rank) {
    ranked.push_back(RankedDetection{sweep.scores[idx], tp[idx] != 0});
  }
  return ranked;
}

// Precision envelope: env[i] = max precision over points i..end, so the
// envelope at recall r is env[first point with recall >= r].
std::vector<double> precision_envelope(const PRCurve& curve) {
  std::vector<double> env(curve.points.size(), 0.0);
  double running = 0.0;
  for (std::size_t i = curve.points.size(); i-- > 0;) {
    running = std::max(running, curve.points[i].precision);
    env[i] = running;
  }
  return env;
}

double envelope_at(const PRCurve& curve, const std::vector<double>& env,
                   double recall) {
  const auto it = std::lower_bound(
      curve.points.begin(), curve.points.end(), recall,
      [](const PRPoint& p, double r) { return p.recall < r; });
  if (it == curve.points.end()) return 0.0;
  return env[static_cast<std::size_t>(it - curve.points.begin())];
}

}  // namespace

std::span<const double> standard_iou_thresholds() {
  return kStandardThresholds;
}

double average_precision(const PRCurve& curve, Interpolation interp) {
  if (curve.points.empty()) return 0.0;
  const std::vector<double> env = precision_envelope(curve);
  if (interp == Interpolation::Coco101) {
    double sum = 0.0;
    for (int k = 0; k <= 100; ++k) {
      sum += envelope_at(curve, env, k / 100.0);
    }
    return sum / 101.0;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const double r = curve.points[i].recall;
    if (r > prev_recall) {
      ap += (r - prev_recall) * env[i];
      prev_recall = r;
    }
  }
  return ap;
}

std::vector<RankedDetection> rank_detections(
    std::span<const FrameAnnotation> annotations,
    std::span<const Prediction> predictions, double alpha, IouMode mode,
    int iou_resolution, int threads) {
  const DetectionSweep sweep =
      build_sweep(annotations, predictions, mode, iou_resolution, threads);
  return sweep_at(sweep, alpha);
}

PRCurve detection_pr(std::span<const RankedDetection> ranked,
                     std::int64_t total_gt) {
  if (total_gt <= 0) {
    throw EmptyGroundTruth("no ground truth to evaluate against");
  }
  PRCurve curve;
  std::int64_t tp = 0;
  std::int64_t seen = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    tp += ranked[i].true_positive ? 1 : 0;
    ++seen;
    const bool group_end =
        i + 1 == ranked.size() || ranked[i + 1].score != ranked[i].score;
    if (group_end) {
      curve.points.push_back(PRPoint{
          static_cast<double>(tp) / static_cast<double>(total_gt),
          static_cast<double>(tp) / static_cast<double>(seen),
          ranked[i].score});
    }
  }
  return curve;
}

double APResult::ap_at(double alpha) const {
  for (const auto& [a, ap] : per_threshold) {
    if (a == alpha || std::abs(a - alpha) < 1e-12) return ap;
  }
  throw Error("no AP entry at the requested threshold");
}

APResult coco_evaluate(std::span<const FrameAnnotation> annotations,
                       std::span<const Prediction> predictions, IouMode mode,
                       std::span<const double> extra_alphas,
                       int iou_resolution, int threads) {
  const DetectionSweep sweep =
      build_sweep(annotations, predictions, mode, iou_resolution, threads);
  if (sweep.total_gt == 0) {
    throw EmptyGroundTruth("no ground truth to evaluate against");
  }

  std::vector<double> alphas(kStandardThresholds.begin(),
                             kStandardThresholds.end());
  for (double a : extra_alphas) alphas.push_back(a);
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end(),
                           [](double a, double b) {
                             return std::abs(a - b) < 1e-12;
                           }),
               alphas.end());

  APResult result;
  result.mode = mode;
  result.per_threshold.resize(alphas.size());
  parallel_for(alphas.size(), threads, [&](std::size_t i) {
    const std::vector<RankedDetection> ranked = sweep_at(sweep, alphas[i]);
    const PRCurve curve = detection_pr(ranked, sweep.total_gt);
    result.per_threshold[i] = {alphas[i], average_precision(curve)};
  });

  double sum = 0.0;
  for (double t : kStandardThresholds) sum += result.ap_at(t);
  result.coco_map = sum / static_cast<double>(kStandardThresholds.size());
  return result;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t n = 0;
  for (const auto& row : counts) {
    for (std::int64_t c : row) n += c;
  }
  return n;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t i) const {
  std::int64_t n = 0;
  for (std::int64_t c : counts[i]) n += c;
  return n;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t j) const {
  std::int64_t n = 0;
  for (const auto& row : counts) n += row[j];
  return n;
}

ConfusionMatrix confusion(std::span<const std::string> gt_labels,
                          std::span<const std::string> pred_labels,
                          std::span<const std::string> classes) {
  if (gt_labels.size() != pred_labels.size()) {
    throw SchemaError("ground-truth and predicted label lists differ in size");
  }
  ConfusionMatrix cm;
  cm.classes.assign(classes.begin(), classes.end());
  cm.counts.assign(classes.size(),
                   std::vector<std::int64_t>(classes.size(), 0));
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;
  for (std::size_t i = 0; i < gt_labels.size(); ++i) {
    const auto gi = index.find(gt_labels[i]);
    const auto pi = index.find(pred_labels[i]);
    if (gi == index.end()) {
      throw SchemaError("label outside the class list: '" + gt_labels[i] +
                        "'");
    }
    if (pi == index.end()) {
      throw SchemaError("label outside the class list: '" + pred_labels[i] +
                        "'");
    }
    ++cm.counts[gi->second][pi->second];
  }
  return cm;
}

ClassificationReport classification_report(const ConfusionMatrix& cm) {
  const std::size_t n = cm.classes.size();
  if (n == 0 || cm.total() == 0) {
    throw EmptyInput("empty confusion matrix");
  }
  ClassificationReport report;
  report.classes = cm.classes;
  report.precision.resize(n);
  report.recall.resize(n);
  report.f1.resize(n);
  report.supports.resize(n);

  std::int64_t trace = 0;
  std::int64_t total_support = 0;
  double f1_sum = 0.0;
  double weighted_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t diag = cm.counts[i][i];
    const std::int64_t row = cm.row_sum(i);
    const std::int64_t col = cm.col_sum(i);
    trace += diag;
    report.supports[i] = row;
    total_support += row;
    report.precision[i] =
        col > 0 ? static_cast<double>(diag) / static_cast<double>(col) : 0.0;
    report.recall[i] =
        row > 0 ? static_cast<double>(diag) / static_cast<double>(row) : 0.0;
    const double pr = report.precision[i] + report.recall[i];
    report.f1[i] =
        pr > 0.0 ? 2.0 * report.precision[i] * report.recall[i] / pr : 0.0;
    f1_sum += report.f1[i];
    weighted_sum += static_cast<double>(row) * report.f1[i];
  }
  report.accuracy =
      static_cast<double>(trace) / static_cast<double>(cm.total());
  report.macro_f1 = f1_sum / static_cast<double>(n);
  report.weighted_f1 = weighted_sum / static_cast<double>(total_support);
  return report;
}

PRCurve one_vs_rest_pr(std::span<const double> scores,
                       std::span<const std::uint8_t> positives) {
  if (scores.size() != positives.size()) {
    throw SchemaError("score and positive-flag lists differ in size");
  }
  std::int64_t total_pos = 0;
  for (std::uint8_t p : positives) total_pos += p ? 1 : 0;
  if (total_pos == 0) {
    throw EmptyGroundTruth("no positive samples for this class");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return scores[a] > scores[b];
  });
  PRCurve curve;
  std::int64_t tp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    tp += positives[order[i]] ? 1 : 0;
    const bool group_end = i + 1 == order.size() ||
                           scores[order[i + 1]] != scores[order[i]];
    if (group_end) {
      curve.points.push_back(PRPoint{
          static_cast<double>(tp) / static_cast<double>(total_pos),
          static_cast<double>(tp) / static_cast<double>(i + 1),
          scores[order[i]]});
    }
  }
  return curve;
}

PRCurve label_pr(std::span<const std::string> gt_labels,
                 std::span<const std::string> pred_labels,
                 std::span<const double> scores,
                 std::string_view positive_class) {
  if (gt_labels.size() != pred_labels.size() ||
      gt_labels.size() != scores.size()) {
    throw SchemaError("label and score lists differ in size");
  }
  std::int64_t total_pos = 0;
  for (const std::string& g : gt_labels) {
    if (g == positive_class) ++total_pos;
  }
  if (total_pos == 0) {
    throw EmptyGroundTruth("no ground-truth samples of class '" +
                           std::string(positive_class) + "'");
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pred_labels.size(); ++i) {
    if (pred_labels[i] == positive_class) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  PRCurve curve;
  std::int64_t tp = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    tp += gt_labels[candidates[i]] == positive_class ? 1 : 0;
    const bool group_end = i + 1 == candidates.size() ||
                           scores[candidates[i + 1]] != scores[candidates[i]];
    if (group_end) {
      curve.points.push_back(PRPoint{
          static_cast<double>(tp) / static_cast<double>(total_pos),
          static_cast<double>(tp) / static_cast<double>(i + 1),
          scores[candidates[i]]});
    }
  }
  return curve;
}

std::string_view binarize_posture_label(std::string_view label) {
  if (label == "WLK") return "WLK";
  if (label == "SIT" || label == "STD" || label == "STA") return "STA";
  throw SchemaError("not a posture label: '" + std::string(label) + "'");
}

}  // namespace flockeval
