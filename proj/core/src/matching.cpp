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
#include "flockeval/matching.hpp"

#include <algorithm>
#include <map>

#include "flockeval/parallel.hpp"

namespace flockeval {

GtGeometry gt_geometry(const BirdAnnotation& bird) {
  GtGeometry g;
  g.polygon = bird.polygon;
  g.bbox = polygon_to_bbox(*bird.polygon);
  return g;
}

double pair_iou(const GtGeometry& gt, const Prediction& pred,
                const MatchConfig& cfg) {
  if (cfg.mode == IouMode::Polygon && gt.polygon && pred.polygon) {
    return polygon_iou(*gt.polygon, *pred.polygon, cfg.iou_resolution);
  }
  return bbox_iou(gt.bbox, pred.effective_bbox());
}

MatchResult match_frame(std::span<const GtGeometry> gt,
                        std::span<const Prediction> preds,
                        const MatchConfig& cfg) {
  MatchResult result;
  std::vector<char> used(preds.size(), 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t j = 0; j < preds.size(); ++j) {
      if (used[j]) continue;
      const double iou = pair_iou(gt[i], preds[j], cfg);
      if (iou <= cfg.alpha) continue;
      if (best == -1 || iou > best_iou) {  // first max wins: lowest index
        best = static_cast<int>(j);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      used[best] = 1;
      result.pairs.push_back(
          MatchPair{static_cast<int>(i), best, best_iou});
    } else {
      result.unmatched_gt.push_back(static_cast<int>(i));
    }
  }
  for (std::size_t j = 0; j < preds.size(); ++j) {
    if (!used[j]) result.unmatched_pred.push_back(static_cast<int>(j));
  }
  return result;
}

std::int64_t DatasetMatches::pair_count() const {
  std::int64_t n = 0;
  for (const FrameMatch& f : frames) n += std::ssize(f.result.pairs);
  return n;
}

std::int64_t DatasetMatches::false_negatives() const {
  std::int64_t n = 0;
  for (const FrameMatch& f : frames) n += std::ssize(f.result.unmatched_gt);
  return n;
}

std::int64_t DatasetMatches::false_positives() const {
  std::int64_t n = std::ssize(unknown_frame_predictions);
  for (const FrameMatch& f : frames) n += std::ssize(f.result.unmatched_pred);
  return n;
}

DatasetMatches match_dataset(std::span<const FrameAnnotation> annotations,
                             std::span<const Prediction> predictions,
                             const MatchConfig& cfg, int threads) {
  DatasetMatches out;
  out.frames.resize(annotations.size());

  std::map<FrameKey, std::size_t> frame_of;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    frame_of[FrameKey{annotations[i].video_id, annotations[i].frame_index}] =
        i;
  }

  std::vector<std::vector<std::size_t>> preds_per_frame(annotations.size());
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    const auto it = frame_of.find(
        FrameKey{predictions[p].video_id, predictions[p].frame_index});
    if (it == frame_of.end()) {
      out.unknown_frame_predictions.push_back(p);
    } else {
      preds_per_frame[it->second].push_back(p);
    }
  }

  parallel_for(annotations.size(), threads, [&](std::size_t i) {
    const FrameAnnotation& frame = annotations[i];
    FrameMatch& fm = out.frames[i];
    fm.key = FrameKey{frame.video_id, frame.frame_index};

    std::vector<GtGeometry> gt;
    for (std::size_t b = 0; b < frame.birds.size(); ++b) {
      if (!frame.birds[b].matchable()) continue;
      fm.gt_bird_index.push_back(b);
      gt.push_back(gt_geometry(frame.birds[b]));
    }
    fm.prediction_index = preds_per_frame[i];
    std::vector<Prediction> preds;
    preds.reserve(fm.prediction_index.size());
    for (std::size_t p : fm.prediction_index) preds.push_back(predictions[p]);
    fm.result = match_frame(gt, preds, cfg);
  });
  return out;
}

}  // namespace flockeval
