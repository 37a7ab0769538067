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
#ifndef FLOCKEVAL_MATCHING_HPP_
#define FLOCKEVAL_MATCHING_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flockeval/geometry.hpp"
#include "flockeval/schema.hpp"

namespace flockeval {

enum class IouMode { BBox, Polygon };

// The ground-truth iteration order and the tie rule are fixed policies
// today, but they are named in the config so the choice stays visible and
// alternatives can be added without changing call sites.
enum class GtOrder { AnnotationOrder };
enum class TieBreak { LowestPredictionIndex };

struct MatchConfig {
  double alpha = 0.5;
  IouMode mode = IouMode::BBox;
  GtOrder gt_order = GtOrder::AnnotationOrder;
  TieBreak tie_break = TieBreak::LowestPredictionIndex;
  int iou_resolution = kDefaultIouResolution;
};

// Geometry view of one ground-truth object, detached from its labels.
struct GtGeometry {
  BBox bbox;
  std::optional<Polygon8> polygon;
};

// Matching view of a visible bird. Pre: bird.matchable().
GtGeometry gt_geometry(const BirdAnnotation& bird);

// IoU between a ground truth and a prediction under the configured mode.
// Polygon mode falls back to box IoU when either side has no polygon.
double pair_iou(const GtGeometry& gt, const Prediction& pred,
                const MatchConfig& cfg);

struct MatchPair {
  int gt_index = -1;
  int pred_index = -1;
  double iou = 0.0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchResult {
  std::vector<MatchPair> pairs;       // ascending gt_index
  std::vector<int> unmatched_gt;      // false negatives
  std::vector<int> unmatched_pred;    // false positives

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

// Greedy pairing: ground truths in annotation order each take the unused
// prediction with the highest IoU strictly above alpha; ties go to the
// lowest prediction index. No geometry is paired twice.
MatchResult match_frame(std::span<const GtGeometry> gt,
                        std::span<const Prediction> preds,
                        const MatchConfig& cfg);

struct FrameKey {
  std::string video_id;
  std::int64_t frame_index = 0;

  friend auto operator<=>(const FrameKey&, const FrameKey&) = default;
};

// One frame's matching outcome, with index maps back to the inputs:
// gt slot i is annotations[...].birds[gt_bird_index[i]], prediction slot j
// is predictions[prediction_index[j]].
struct FrameMatch {
  FrameKey key;
  std::vector<std::size_t> gt_bird_index;
  std::vector<std::size_t> prediction_index;
  MatchResult result;
};

struct DatasetMatches {
  std::vector<FrameMatch> frames;  // in ground-truth frame order
  // Indices of predictions whose (video, frame) has no ground-truth frame.
  std::vector<std::size_t> unknown_frame_predictions;

  std::int64_t pair_count() const;
  std::int64_t false_negatives() const;
  std::int64_t false_positives() const;  // includes unknown-frame predictions
};

// Runs match_frame over every ground-truth frame, fanning out across
// frames. Output is identical for any thread count. Frames with no
// predictions come back all-FN; predictions pointing at unknown frames are
// recorded, not fatal.
DatasetMatches match_dataset(std::span<const FrameAnnotation> annotations,
                             std::span<const Prediction> predictions,
                             const MatchConfig& cfg, int threads = 0);

}  // namespace flockeval

#endif  // FLOCKEVAL_MATCHING_HPP_
