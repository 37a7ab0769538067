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
#ifndef FLOCKEVAL_SYNTHETIC_HPP_
#define FLOCKEVAL_SYNTHETIC_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flockeval/geometry.hpp"
#include "flockeval/schema.hpp"

namespace flockeval {

// Scene layout and label distributions for the seeded pen generator.
// Distributions index kAllBehaviors / kAllPostures order.
struct SceneConfig {
  double frame_width = 1280.0;
  double frame_height = 720.0;
  int bird_count = 20;
  int frame_count = 100;
  int video_count = 1;
  std::string video_prefix = "sim";
  int camera_id = 1;

  std::array<double, 7> behavior_distribution = {0.15, 0.05, 0.05, 0.01,
                                                 0.09, 0.05, 0.60};
  std::array<double, 3> posture_distribution = {0.20, 0.40, 0.40};
  double nvs_rate = 0.0;

  // Body geometry: semi-major axis range, minor/major aspect range, and
  // per-vertex radial noise fraction.
  double min_semi_major = 24.0;
  double max_semi_major = 40.0;
  double min_aspect = 0.45;
  double max_aspect = 0.70;
  double radial_noise = 0.15;

  // Each bird wanders around a fixed home position with this amplitude.
  double wander_amplitude = 6.0;
  // Guaranteed bounding-box gap between any two birds in every frame.
  double min_separation = 12.0;
  double frame_margin = 8.0;
};

struct SyntheticScene {
  DatasetManifest manifest;
  std::vector<FrameAnnotation> frames;  // video order, frame, bird ascending
  // Pairwise bbox gap that holds in every frame; corruption keeps jitter
  // well inside it so a moved prediction can only overlap its own origin.
  double separation_guarantee = 0.0;
};

// Deterministic for a fixed (cfg, seed); every bird is a valid clockwise
// eight-point outline inside the frame and every row obeys the count rule.
// Throws GenerationError when the birds cannot be packed into the frame.
SyntheticScene generate_scene(const SceneConfig& cfg, std::uint64_t seed);

// Writes manifest.json, per-frame polygon JSON, and per-video ethogram CSV
// under dir, in exactly the formats the schema parsers read back.
void write_scene(const SyntheticScene& scene,
                 const std::filesystem::path& dir);

enum class PredictionOrigin { Jittered, Spurious };

std::string_view to_string(PredictionOrigin origin);

// Ground-truth provenance of one emitted prediction. IoU values are the
// library-computed overlaps against the origin bird, so replaying the
// ledger reproduces pipeline metrics bit for bit.
struct LedgerEntry {
  PredictionOrigin origin = PredictionOrigin::Jittered;
  std::string video_id;
  std::int64_t frame_index = 0;
  int gt_bird_id = -1;  // -1 for spurious
  double iou_bbox = 0.0;
  double iou_polygon = 0.0;
  std::string gt_label;  // empty for spurious
  std::string emitted_label;
  double score = 0.0;
};

struct GtRef {
  std::string video_id;
  std::int64_t frame_index = 0;
  int bird_id = 0;
};

struct CorruptionLedger {
  std::vector<LedgerEntry> entries;  // index-aligned with the predictions
  std::vector<GtRef> dropped;        // ground truths with no prediction
  std::int64_t total_gt = 0;         // matchable ground-truth count
};

enum class LabelKind { Behavior, Posture };

// score = clamp(base + iou_weight * bbox IoU + N(0, noise_sigma), 0, 1)
struct ScoreModel {
  double base = 0.35;
  double iou_weight = 0.60;
  double noise_sigma = 0.03;
};

struct NoiseConfig {
  double jitter_sigma = 0.0;         // pixels, translation of the whole body
  double drop_rate = 0.0;            // probability a bird goes undetected
  double false_positive_rate = 0.0;  // expected spurious detections per frame

  // Row-stochastic confusion over confusion_classes; empty classes means
  // labels pass through unchanged.
  std::vector<std::string> confusion_classes;
  std::vector<std::vector<double>> label_confusion;

  LabelKind label_kind = LabelKind::Behavior;
  ScoreModel score_model;
  int iou_resolution = kDefaultIouResolution;
};

struct CorruptionResult {
  std::vector<Prediction> predictions;
  CorruptionLedger ledger;
};

// Derives predictions from the scene under the noise model. Jitter is
// clamped inside the scene's separation guarantee, and spurious boxes are
// placed with zero overlap against every ground truth, so each prediction
// can match exactly one bird; the ledger is therefore an exact oracle for
// TP/FP/FN, AP, and classification metrics at any threshold.
CorruptionResult corrupt(const SyntheticScene& scene,
                         const NoiseConfig& noise, std::uint64_t seed);

std::string serialize_ledger(const CorruptionLedger& ledger);

// The ground-truth class label of a bird under the given view: effective
// behavior code, or posture code. Empty when the bird has none.
std::string gt_class_label(const BirdAnnotation& bird, LabelKind kind);

// Exposed for tests: one synthetic bird body around a center point.
Polygon8 sample_blob(double cx, double cy, double semi_major,
                     double semi_minor, double rotation, double radial_noise,
                     std::uint64_t vertex_key);

}  // namespace flockeval

#endif  // FLOCKEVAL_SYNTHETIC_HPP_
