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
#ifndef FLOCKEVAL_SCHEMA_HPP_
#define FLOCKEVAL_SCHEMA_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flockeval/geometry.hpp"

namespace flockeval {

enum class Posture { Walking, Sitting, Standing };
enum class BinaryPosture { Stationary, Walking };
enum class Behavior {
  Eating,
  Drinking,
  Preening,
  AlloPreening,
  Foraging,
  DustBathing,
  Control,
};

// Short codes as used in the annotation CSV columns and prediction labels.
std::string_view code_of(Posture p);                 // WLK SIT STD
std::string_view code_of(Behavior b);                // EAT DRK PRE PRA FOR DUB CTR
std::string_view code_of(BinaryPosture p);           // STA WLK
std::optional<Posture> posture_from_code(std::string_view code);
std::optional<Behavior> behavior_from_code(std::string_view code);

// Sitting and standing collapse to stationary.
BinaryPosture binarize(Posture p);

inline constexpr std::array<Posture, 3> kAllPostures = {
    Posture::Walking, Posture::Sitting, Posture::Standing};
inline constexpr std::array<Behavior, 7> kAllBehaviors = {
    Behavior::Eating,     Behavior::Drinking,    Behavior::Preening,
    Behavior::AlloPreening, Behavior::Foraging,  Behavior::DustBathing,
    Behavior::Control};

// One data row of the 15-column annotation CSV. Flag order matches the
// column order: WLK SIT STD EAT DRK PRE PRA FOR DUB NVS.
struct EthogramRow {
  std::string date;
  std::string image;
  std::string time;
  int bird_id = 0;
  std::array<int, 10> flags{};
  int count = 0;

  int flag_sum() const;
  bool nvs() const { return flags[9] != 0; }
  // First (and, on valid rows, only) posture/behavior flag set.
  std::optional<Posture> posture() const;
  std::optional<Behavior> behavior() const;

  friend bool operator==(const EthogramRow&, const EthogramRow&) = default;
};

// The 15 CSV column names, in file order.
std::span<const std::string_view> ethogram_columns();

// One LabelMe shape: the bird id (from the shape label) plus its raw points.
struct RawShape {
  int bird_id = 0;
  std::vector<Point> points;

  friend bool operator==(const RawShape&, const RawShape&) = default;
};

// Parses the LabelMe-compatible subset: top-level "shapes", each carrying
// "label" (bird id as string) and "points". Unknown fields are ignored.
// Annotation order is preserved. Point-count and geometry problems are left
// to validate_polygon downstream.
std::vector<RawShape> parse_polygon_json(std::string_view bytes);
std::string serialize_polygon_json(std::span<const RawShape> shapes);

std::vector<EthogramRow> parse_ethogram_csv(std::string_view bytes);
std::string serialize_ethogram_csv(std::span<const EthogramRow> rows);

enum class ViolationCode {
  CountRule,        // count != flag sum or count outside {1, 2}
  MultiPosture,     // more than one posture flag set
  MultiBehavior,    // more than one behavior flag set
  NvsConflict,      // NVS set together with any other flag
  PolygonAnomaly,   // geometry check failed (see anomaly field)
  OrphanRow,        // CSV row with no polygon for that (frame, bird)
  OrphanPolygon,    // polygon with no CSV row for that (frame, bird)
  NvsWithPolygon,   // bird marked not-visible but a polygon exists
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string video_id;
  std::int64_t frame_index = -1;  // -1 when not tied to a frame
  std::size_t row = 0;            // 1-based CSV data row, 0 when n/a
  int bird_id = -1;
  std::optional<PolygonAnomaly> anomaly;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> entries;

  bool clean() const { return entries.empty(); }
  void add(Violation v) { entries.push_back(std::move(v)); }
  void append(const ValidationReport& other);
};

std::string serialize_validation_report(const ValidationReport& report);

// Checks every row against the count rule and flag exclusivity. Violations
// are report content, not errors; clean rows pass through untouched.
ValidationReport validate_rows(std::span<const EthogramRow> rows);

// One visible or not-visible bird inside a merged frame.
struct BirdAnnotation {
  int bird_id = 0;
  std::optional<Polygon8> polygon;
  std::vector<Point> raw_points;  // as annotated, kept even when anomalous
  std::optional<Posture> posture;
  std::optional<Behavior> behavior;
  bool visible = true;
  std::vector<PolygonAnomaly> anomalies;

  // Usable as matching ground truth: has a polygon and no disqualifying
  // anomaly (wrong count, zero area, non-finite).
  bool matchable() const;

  friend bool operator==(const BirdAnnotation&, const BirdAnnotation&) = default;
};

struct FrameAnnotation {
  std::string video_id;
  std::int64_t frame_index = 0;
  std::vector<BirdAnnotation> birds;

  friend bool operator==(const FrameAnnotation&, const FrameAnnotation&) = default;
};

// Behavior class of a bird for classification purposes: the explicit
// behavior when present, Control for a visible posture-only bird (the CSV
// has no control column; count = 1 with a posture means "no activity"),
// and empty for not-visible birds.
std::optional<Behavior> effective_behavior(const BirdAnnotation& bird);

// External model output. After parsing, bbox is always present (derived
// from the polygon when the record carried only a polygon).
struct Prediction {
  std::string video_id;
  std::int64_t frame_index = 0;
  std::optional<BBox> bbox;
  std::optional<Polygon8> polygon;
  std::string label;
  double score = 0.0;

  const BBox& effective_bbox() const { return *bbox; }

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

// Labels accepted in prediction files: the three postures, the binary
// stationary code STA, and the seven behaviors.
std::span<const std::string_view> valid_prediction_labels();
bool is_posture_label(std::string_view label);
bool is_behavior_label(std::string_view label);

// NDJSON, one record per line: {"video","frame","bbox","polygon","label","score"}.
std::vector<Prediction> parse_predictions(std::string_view bytes);
std::string serialize_predictions(std::span<const Prediction> preds);

struct VideoSource {
  std::string video_id;
  std::string polygon_dir;    // directory of per-frame LabelMe JSON files
  std::string ethogram_csv;   // one CSV per video

  friend bool operator==(const VideoSource&, const VideoSource&) = default;
};

struct DatasetManifest {
  int camera_id = 1;
  double frame_width = 0.0;
  double frame_height = 0.0;
  std::vector<VideoSource> videos;

  std::vector<std::string> video_ids() const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

DatasetManifest parse_manifest(std::string_view bytes);
std::string serialize_manifest(const DatasetManifest& manifest);

// Frame identity: lowercase the name, strip a trailing extension, then read
// the trailing run of decimal digits. Handles both "281_000017.json" and a
// bare frame number in the CSV image column.
std::int64_t frame_index_from_stem(std::string_view name);

// All shapes of one frame, as parsed from that frame's JSON file.
struct PolygonFrame {
  std::string video_id;
  std::int64_t frame_index = 0;
  std::vector<RawShape> shapes;
};

struct VideoRows {
  std::string video_id;
  std::vector<EthogramRow> rows;
};

struct MergeResult {
  std::vector<FrameAnnotation> frames;  // sorted by (video order, frame, bird)
  ValidationReport report;
};

// Joins polygons and ethogram rows on (video, frame, bird). Row-level and
// polygon-level checks land in the report; orphans on either side are
// reported and excluded from the merged frames. Throws MergeError on a
// duplicate bird id within one frame.
MergeResult merge_annotations(std::span<const PolygonFrame> polygon_frames,
                              std::span<const VideoRows> rows,
                              const DatasetManifest& manifest);

struct LoadedDataset {
  DatasetManifest manifest;
  std::vector<FrameAnnotation> frames;
  ValidationReport report;
};

// Reads the manifest and every referenced annotation file, then merges.
// Paths inside the manifest are resolved relative to the manifest location.
LoadedDataset load_dataset(const std::filesystem::path& manifest_path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace flockeval

#endif  // FLOCKEVAL_SCHEMA_HPP_
