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
#include "flockeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "flockeval/errors.hpp"
#include "flockeval/parallel.hpp"
#include "json.hpp"

namespace flockeval {

namespace {

using nlohmann::ordered_json;

std::string format_alpha(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", alpha);
  std::string text = buf;
  while (text.size() > 3 && text.back() == '0') text.pop_back();
  return text;
}

std::string format_ratio(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

// Label pairs harvested from one frame under a class view.
struct LabeledPairs {
  std::vector<std::string> gt;
  std::vector<std::string> pred;
  std::vector<double> score;
};

enum class LabelView { Posture, Behavior };

std::optional<std::string> gt_view_label(const BirdAnnotation& bird,
                                         LabelView view) {
  if (view == LabelView::Posture) {
    if (!bird.posture) return std::nullopt;
    return std::string(code_of(binarize(*bird.posture)));
  }
  const std::optional<Behavior> b = effective_behavior(bird);
  if (!b) return std::nullopt;
  return std::string(code_of(*b));
}

std::optional<std::string> pred_view_label(const Prediction& pred,
                                           LabelView view) {
  if (view == LabelView::Posture) {
    if (!is_posture_label(pred.label)) return std::nullopt;
    return std::string(binarize_posture_label(pred.label));
  }
  if (!is_behavior_label(pred.label)) return std::nullopt;
  return pred.label;
}

LabeledPairs collect_pairs(
    std::span<const FrameAnnotation> annotations,
    std::span<const Prediction> predictions,
    const std::vector<std::vector<std::size_t>>& preds_per_frame,
    LabelView view, const EvaluateConfig& cfg) {
  MatchConfig match_cfg;
  match_cfg.alpha = cfg.cls_alpha;
  match_cfg.mode = cfg.mode;
  match_cfg.iou_resolution = cfg.iou_resolution;

  std::vector<LabeledPairs> per_frame(annotations.size());
  parallel_for(annotations.size(), cfg.threads, [&](std::size_t i) {
    const FrameAnnotation& frame = annotations[i];
    std::vector<GtGeometry> gt;
    std::vector<std::string> gt_labels;
    for (const BirdAnnotation& bird : frame.birds) {
      if (!bird.matchable()) continue;
      const std::optional<std::string> label = gt_view_label(bird, view);
      if (!label) continue;
      gt.push_back(gt_geometry(bird));
      gt_labels.push_back(*label);
    }
    std::vector<Prediction> preds;
    std::vector<std::string> pred_labels;
    for (std::size_t p : preds_per_frame[i]) {
      const std::optional<std::string> label =
          pred_view_label(predictions[p], view);
      if (!label) continue;
      preds.push_back(predictions[p]);
      pred_labels.push_back(*label);
    }
    const MatchResult matched = match_frame(gt, preds, match_cfg);
    LabeledPairs& out = per_frame[i];
    for (const MatchPair& pair : matched.pairs) {
      out.gt.push_back(gt_labels[static_cast<std::size_t>(pair.gt_index)]);
      out.pred.push_back(
          pred_labels[static_cast<std::size_t>(pair.pred_index)]);
      out.score.push_back(
          preds[static_cast<std::size_t>(pair.pred_index)].score);
    }
  });

  LabeledPairs all;
  for (const LabeledPairs& frame_pairs : per_frame) {
    all.gt.insert(all.gt.end(), frame_pairs.gt.begin(), frame_pairs.gt.end());
    all.pred.insert(all.pred.end(), frame_pairs.pred.begin(),
                    frame_pairs.pred.end());
    all.score.insert(all.score.end(), frame_pairs.score.begin(),
                     frame_pairs.score.end());
  }
  return all;
}

std::vector<std::string> behavior_classes() {
  std::vector<std::string> classes;
  for (Behavior b : kAllBehaviors) classes.emplace_back(code_of(b));
  return classes;
}

ordered_json classification_to_json(const ClassificationReport& report) {
  ordered_json j;
  j["accuracy"] = round_ratio(report.accuracy);
  j["macro_f1"] = round_ratio(report.macro_f1);
  j["weighted_f1"] = round_ratio(report.weighted_f1);
  ordered_json classes = ordered_json::array();
  for (std::size_t i = 0; i < report.classes.size(); ++i) {
    ordered_json c;
    c["class"] = report.classes[i];
    c["precision"] = round_ratio(report.precision[i]);
    c["recall"] = round_ratio(report.recall[i]);
    c["f1"] = round_ratio(report.f1[i]);
    c["support"] = report.supports[i];
    classes.push_back(std::move(c));
  }
  j["classes"] = std::move(classes);
  return j;
}

ordered_json confusion_to_json(const ConfusionMatrix& cm) {
  ordered_json j;
  j["classes"] = cm.classes;
  ordered_json rows = ordered_json::array();
  for (const auto& row : cm.counts) rows.push_back(row);
  j["counts"] = std::move(rows);
  return j;
}

ordered_json report_to_json(const MetricReport& report) {
  ordered_json doc;
  doc["mode"] = report.mode == IouMode::BBox ? "bbox" : "segm";
  doc["total_gt"] = report.total_gt;
  doc["total_predictions"] = report.total_predictions;

  ordered_json detection;
  ordered_json per_threshold = ordered_json::array();
  for (const auto& [alpha, ap] : report.detection.per_threshold) {
    ordered_json entry;
    entry["alpha"] = alpha;
    entry["ap"] = round_ratio(ap);
    per_threshold.push_back(std::move(entry));
  }
  detection["per_threshold"] = std::move(per_threshold);
  detection["coco_map"] = round_ratio(report.detection.coco_map);
  doc["detection"] = std::move(detection);

  ordered_json counts = ordered_json::array();
  for (const MatchCounts& c : report.counts) {
    ordered_json entry;
    entry["alpha"] = c.alpha;
    entry["tp"] = c.tp;
    entry["fp"] = c.fp;
    entry["fn"] = c.fn;
    counts.push_back(std::move(entry));
  }
  doc["matching"] = std::move(counts);

  doc["cls_alpha"] = report.cls_alpha;
  if (report.posture) {
    ordered_json posture = classification_to_json(*report.posture);
    posture["pairs"] = report.posture_pairs;
    posture["confusion"] = confusion_to_json(report.posture_cm);
    doc["posture"] = std::move(posture);
  }
  if (report.behavior) {
    ordered_json behavior = classification_to_json(*report.behavior);
    behavior["pairs"] = report.behavior_pairs;
    behavior["confusion"] = confusion_to_json(report.behavior_cm);
    doc["behavior"] = std::move(behavior);
  }
  return doc;
}

void mean_into(std::optional<double>& slot, double sum, int n) {
  if (n > 0) slot = sum / n;
}

}  // namespace

double round_ratio(double value) {
  return std::round(value * 10000.0) / 10000.0;
}

MetricReport evaluate_dataset(std::span<const FrameAnnotation> annotations,
                              std::span<const Prediction> predictions,
                              const EvaluateConfig& cfg) {
  MetricReport report;
  report.mode = cfg.mode;
  report.cls_alpha = cfg.cls_alpha;
  report.total_predictions = std::ssize(predictions);
  for (const FrameAnnotation& frame : annotations) {
    for (const BirdAnnotation& bird : frame.birds) {
      if (bird.matchable()) ++report.total_gt;
    }
  }
  if (report.total_gt == 0) {
    throw EmptyGroundTruth("no matchable ground truth in the dataset");
  }

  std::set<FrameKey> known;
  std::map<FrameKey, std::size_t> frame_of;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const FrameKey key{annotations[i].video_id, annotations[i].frame_index};
    known.insert(key);
    frame_of[key] = i;
  }
  std::vector<std::vector<std::size_t>> preds_per_frame(annotations.size());
  std::size_t on_known_frames = 0;
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    const auto it = frame_of.find(
        FrameKey{predictions[p].video_id, predictions[p].frame_index});
    if (it != frame_of.end()) {
      preds_per_frame[it->second].push_back(p);
      ++on_known_frames;
    }
  }
  if (!predictions.empty() && on_known_frames == 0) {
    throw EmptyIntersection(
        "predictions and ground truth share no (video, frame) keys");
  }

  report.detection =
      coco_evaluate(annotations, predictions, cfg.mode, cfg.extra_alphas,
                    cfg.iou_resolution, cfg.threads);

  for (const auto& [alpha, ap] : report.detection.per_threshold) {
    MatchConfig match_cfg;
    match_cfg.alpha = alpha;
    match_cfg.mode = cfg.mode;
    match_cfg.iou_resolution = cfg.iou_resolution;
    const DatasetMatches matches =
        match_dataset(annotations, predictions, match_cfg, cfg.threads);
    report.counts.push_back(MatchCounts{alpha, matches.pair_count(),
                                        matches.false_positives(),
                                        matches.false_negatives()});
  }

  const LabeledPairs posture_pairs = collect_pairs(
      annotations, predictions, preds_per_frame, LabelView::Posture, cfg);
  report.posture_pairs = std::ssize(posture_pairs.gt);
  if (report.posture_pairs > 0) {
    const std::vector<std::string> classes = {"STA", "WLK"};
    report.posture_cm = confusion(posture_pairs.gt, posture_pairs.pred,
                                  classes);
    report.posture = classification_report(report.posture_cm);
  }

  const LabeledPairs behavior_pairs = collect_pairs(
      annotations, predictions, preds_per_frame, LabelView::Behavior, cfg);
  report.behavior_pairs = std::ssize(behavior_pairs.gt);
  if (report.behavior_pairs > 0) {
    const std::vector<std::string> classes = behavior_classes();
    report.behavior_cm = confusion(behavior_pairs.gt, behavior_pairs.pred,
                                   classes);
    report.behavior = classification_report(report.behavior_cm);
    for (const std::string& cls : classes) {
      const bool has_positive =
          std::find(behavior_pairs.gt.begin(), behavior_pairs.gt.end(),
                    cls) != behavior_pairs.gt.end();
      if (!has_positive) continue;
      report.behavior_curves.emplace_back(
          cls, label_pr(behavior_pairs.gt, behavior_pairs.pred,
                        behavior_pairs.score, cls));
    }
  }
  return report;
}

std::string serialize_report_json(const MetricReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

std::string detection_csv(
    std::span<const std::pair<std::string, const MetricReport*>> rows) {
  std::string out = "run";
  if (!rows.empty()) {
    for (const auto& [alpha, ap] : rows.front().second->detection
                                       .per_threshold) {
      out += ",AP:" + format_alpha(alpha);
    }
  }
  out += ",coco_map\n";
  for (const auto& [label, report] : rows) {
    out += label;
    for (const auto& [alpha, ap] : report->detection.per_threshold) {
      out += ',' + format_ratio(ap);
    }
    out += ',' + format_ratio(report->detection.coco_map);
    out += '\n';
  }
  return out;
}

std::string classification_csv(const MetricReport& report) {
  std::string out = "view,class,precision,recall,f1,support\n";
  const auto emit = [&out](const char* view,
                           const ClassificationReport& cls) {
    for (std::size_t i = 0; i < cls.classes.size(); ++i) {
      out += view;
      out += ',' + cls.classes[i];
      out += ',' + format_ratio(cls.precision[i]);
      out += ',' + format_ratio(cls.recall[i]);
      out += ',' + format_ratio(cls.f1[i]);
      out += ',' + std::to_string(cls.supports[i]);
      out += '\n';
    }
    out += view;
    out += ",_accuracy,,," + format_ratio(cls.accuracy) + ",\n";
    out += view;
    out += ",_macro_f1,,," + format_ratio(cls.macro_f1) + ",\n";
    out += view;
    out += ",_weighted_f1,,," + format_ratio(cls.weighted_f1) + ",\n";
  };
  if (report.posture) emit("posture", *report.posture);
  if (report.behavior) emit("behavior", *report.behavior);
  return out;
}

std::string pr_curves_csv(const MetricReport& report) {
  std::string out = "class,score_threshold,recall,precision\n";
  for (const auto& [cls, curve] : report.behavior_curves) {
    for (const PRPoint& point : curve.points) {
      out += cls;
      out += ',' + format_ratio(point.score_threshold);
      out += ',' + format_ratio(point.recall);
      out += ',' + format_ratio(point.precision);
      out += '\n';
    }
  }
  return out;
}

FoldOutcome fold_evaluate(
    const FoldSpec& spec, std::span<const FrameAnnotation> annotations,
    std::span<const std::optional<std::vector<Prediction>>>
        predictions_per_fold,
    const EvaluateConfig& cfg) {
  if (predictions_per_fold.size() != spec.folds.size()) {
    throw SchemaError("prediction sets do not match the fold count");
  }
  FoldOutcome outcome;
  outcome.reports.resize(spec.folds.size());

  for (std::size_t f = 0; f < spec.folds.size(); ++f) {
    if (!predictions_per_fold[f]) {
      outcome.incomplete = true;
      continue;
    }
    const std::set<std::string> test(spec.folds[f].test_videos.begin(),
                                     spec.folds[f].test_videos.end());
    std::vector<FrameAnnotation> fold_frames;
    for (const FrameAnnotation& frame : annotations) {
      if (test.count(frame.video_id)) fold_frames.push_back(frame);
    }
    std::vector<Prediction> fold_preds;
    for (const Prediction& pred : *predictions_per_fold[f]) {
      if (test.count(pred.video_id)) fold_preds.push_back(pred);
    }
    outcome.reports[f] = evaluate_dataset(fold_frames, fold_preds, cfg);
    ++outcome.folds_present;
  }

  if (outcome.folds_present == 0) return outcome;

  const MetricReport* first = nullptr;
  for (const auto& r : outcome.reports) {
    if (r) {
      first = &*r;
      break;
    }
  }
  outcome.mean_ap.resize(first->detection.per_threshold.size());
  for (std::size_t t = 0; t < outcome.mean_ap.size(); ++t) {
    outcome.mean_ap[t] = {first->detection.per_threshold[t].first, 0.0};
  }
  double map_sum = 0.0;
  for (const auto& r : outcome.reports) {
    if (!r) continue;
    for (std::size_t t = 0; t < outcome.mean_ap.size(); ++t) {
      outcome.mean_ap[t].second += r->detection.per_threshold[t].second;
    }
    map_sum += r->detection.coco_map;
  }
  for (auto& [alpha, sum] : outcome.mean_ap) sum /= outcome.folds_present;
  outcome.mean_coco_map = map_sum / outcome.folds_present;

  int posture_n = 0;
  double pa = 0.0, pm = 0.0, pw = 0.0;
  int behavior_n = 0;
  double ba = 0.0, bm = 0.0, bw = 0.0;
  std::vector<double> class_f1(behavior_classes().size(), 0.0);
  for (const auto& r : outcome.reports) {
    if (!r) continue;
    if (r->posture) {
      ++posture_n;
      pa += r->posture->accuracy;
      pm += r->posture->macro_f1;
      pw += r->posture->weighted_f1;
    }
    if (r->behavior) {
      ++behavior_n;
      ba += r->behavior->accuracy;
      bm += r->behavior->macro_f1;
      bw += r->behavior->weighted_f1;
      for (std::size_t i = 0; i < class_f1.size(); ++i) {
        class_f1[i] += r->behavior->f1[i];
      }
    }
  }
  mean_into(outcome.mean_posture_accuracy, pa, posture_n);
  mean_into(outcome.mean_posture_macro_f1, pm, posture_n);
  mean_into(outcome.mean_posture_weighted_f1, pw, posture_n);
  mean_into(outcome.mean_behavior_accuracy, ba, behavior_n);
  mean_into(outcome.mean_behavior_macro_f1, bm, behavior_n);
  mean_into(outcome.mean_behavior_weighted_f1, bw, behavior_n);
  if (behavior_n > 0) {
    const std::vector<std::string> classes = behavior_classes();
    for (std::size_t i = 0; i < classes.size(); ++i) {
      outcome.mean_behavior_class_f1.emplace_back(classes[i],
                                                  class_f1[i] / behavior_n);
    }
  }
  return outcome;
}

std::string serialize_fold_outcome_json(const FoldOutcome& outcome) {
  ordered_json doc;
  doc["folds_present"] = outcome.folds_present;
  doc["incomplete"] = outcome.incomplete;

  ordered_json folds = ordered_json::array();
  for (std::size_t f = 0; f < outcome.reports.size(); ++f) {
    ordered_json entry;
    entry["fold"] = f + 1;
    entry["present"] = outcome.reports[f].has_value();
    if (outcome.reports[f]) {
      entry["report"] = report_to_json(*outcome.reports[f]);
    }
    folds.push_back(std::move(entry));
  }
  doc["folds"] = std::move(folds);

  if (outcome.folds_present > 0) {
    ordered_json mean;
    ordered_json ap = ordered_json::array();
    for (const auto& [alpha, value] : outcome.mean_ap) {
      ordered_json entry;
      entry["alpha"] = alpha;
      entry["ap"] = round_ratio(value);
      ap.push_back(std::move(entry));
    }
    mean["per_threshold"] = std::move(ap);
    mean["coco_map"] = round_ratio(outcome.mean_coco_map);
    const auto put = [&mean](const char* key,
                             const std::optional<double>& value) {
      if (value) mean[key] = round_ratio(*value);
    };
    put("posture_accuracy", outcome.mean_posture_accuracy);
    put("posture_macro_f1", outcome.mean_posture_macro_f1);
    put("posture_weighted_f1", outcome.mean_posture_weighted_f1);
    put("behavior_accuracy", outcome.mean_behavior_accuracy);
    put("behavior_macro_f1", outcome.mean_behavior_macro_f1);
    put("behavior_weighted_f1", outcome.mean_behavior_weighted_f1);
    if (!outcome.mean_behavior_class_f1.empty()) {
      ordered_json cls;
      for (const auto& [name, value] : outcome.mean_behavior_class_f1) {
        cls[name] = round_ratio(value);
      }
      mean["behavior_class_f1"] = std::move(cls);
    }
    doc["mean"] = std::move(mean);
  }
  return doc.dump(2) + "\n";
}

std::string fold_detection_csv(const FoldOutcome& outcome) {
  std::vector<std::pair<std::string, const MetricReport*>> rows;
  for (std::size_t f = 0; f < outcome.reports.size(); ++f) {
    if (outcome.reports[f]) {
      rows.emplace_back("fold" + std::to_string(f + 1),
                        &*outcome.reports[f]);
    }
  }
  std::string out = detection_csv(rows);
  if (outcome.folds_present > 0) {
    out += "mean";
    for (const auto& [alpha, value] : outcome.mean_ap) {
      out += ',' + format_ratio(value);
    }
    out += ',' + format_ratio(outcome.mean_coco_map);
    out += '\n';
  }
  return out;
}

}  // namespace flockeval
