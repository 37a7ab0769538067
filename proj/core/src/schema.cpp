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
#include "flockeval/schema.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "flockeval/errors.hpp"
#include "json.hpp"

namespace flockeval {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::array<std::string_view, 15> kColumns = {
    "date", "image", "time", "bird ID", "WLK", "SIT", "STD", "EAT",
    "DRK",  "PRE",   "PRA",  "FOR",     "DUB", "NVS", "count"};

// Flag columns start at CSV column 4; order matches EthogramRow::flags.
constexpr int kFirstFlagColumn = 4;
constexpr int kFlagCount = 10;

constexpr std::array<std::string_view, 11> kPredictionLabels = {
    "WLK", "SIT", "STD", "STA", "EAT", "DRK", "PRE", "PRA", "FOR", "DUB",
    "CTR"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

int parse_int_cell(std::string_view cell, std::size_t row,
                   std::string_view what) {
  const std::string_view t = trim(cell);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ParseError("row " + std::to_string(row) + ": " + std::string(what) +
                         " is not an integer: '" + std::string(cell) + "'",
                     ParseError::npos, row);
  }
  return value;
}

int bird_id_from_label(const json& label) {
  std::string text;
  if (label.is_string()) {
    text = label.get<std::string>();
  } else if (label.is_number_integer()) {
    return label.get<int>();
  } else {
    throw SchemaError("shape label must be a string bird id");
  }
  const std::string_view t = trim(text);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() ||
      value <= 0) {
    throw SchemaError("shape label is not a positive bird id: '" + text + "'");
  }
  return value;
}

json parse_json_or_throw(std::string_view bytes) {
  try {
    return json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
}

// Canonical number formatting shared by the JSON emitters so that emitted
// files reparse to bit-identical doubles.
ordered_json point_to_json(const Point& p) { return ordered_json{p.x, p.y}; }

Point point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number()) {
    throw SchemaError("point must be a [x, y] number pair");
  }
  return Point{j[0].get<double>(), j[1].get<double>()};
}

struct FrameBirds {
  std::map<int, const RawShape*> shapes;
  std::map<int, std::pair<const EthogramRow*, std::size_t>> rows;  // row index
};

}  // namespace

std::string_view code_of(Posture p) {
  switch (p) {
    case Posture::Walking:
      return "WLK";
    case Posture::Sitting:
      return "SIT";
    case Posture::Standing:
      return "STD";
  }
  return "";
}

std::string_view code_of(Behavior b) {
  switch (b) {
    case Behavior::Eating:
      return "EAT";
    case Behavior::Drinking:
      return "DRK";
    case Behavior::Preening:
      return "PRE";
    case Behavior::AlloPreening:
      return "PRA";
    case Behavior::Foraging:
      return "FOR";
    case Behavior::DustBathing:
      return "DUB";
    case Behavior::Control:
      return "CTR";
  }
  return "";
}

std::string_view code_of(BinaryPosture p) {
  return p == BinaryPosture::Stationary ? "STA" : "WLK";
}

std::optional<Posture> posture_from_code(std::string_view code) {
  for (Posture p : kAllPostures) {
    if (code_of(p) == code) return p;
  }
  return std::nullopt;
}

std::optional<Behavior> behavior_from_code(std::string_view code) {
  for (Behavior b : kAllBehaviors) {
    if (code_of(b) == code) return b;
  }
  return std::nullopt;
}

BinaryPosture binarize(Posture p) {
  return p == Posture::Walking ? BinaryPosture::Walking
                               : BinaryPosture::Stationary;
}

int EthogramRow::flag_sum() const {
  int sum = 0;
  for (int f : flags) sum += f;
  return sum;
}

std::optional<Posture> EthogramRow::posture() const {
  if (flags[0]) return Posture::Walking;
  if (flags[1]) return Posture::Sitting;
  if (flags[2]) return Posture::Standing;
  return std::nullopt;
}

std::optional<Behavior> EthogramRow::behavior() const {
  static constexpr std::array<Behavior, 6> kByColumn = {
      Behavior::Eating,       Behavior::Drinking, Behavior::Preening,
      Behavior::AlloPreening, Behavior::Foraging, Behavior::DustBathing};
  for (int i = 0; i < 6; ++i) {
    if (flags[3 + i]) return kByColumn[i];
  }
  return std::nullopt;
}

std::span<const std::string_view> ethogram_columns() { return kColumns; }

std::vector<RawShape> parse_polygon_json(std::string_view bytes) {
  const json doc = parse_json_or_throw(bytes);
  if (!doc.is_object() || !doc.contains("shapes")) {
    throw SchemaError("polygon file has no top-level 'shapes' array");
  }
  const json& shapes = doc["shapes"];
  if (!shapes.is_array()) {
    throw SchemaError("'shapes' must be an array");
  }
  std::vector<RawShape> out;
  out.reserve(shapes.size());
  for (const json& shape : shapes) {
    if (!shape.is_object() || !shape.contains("label")) {
      throw SchemaError("shape is missing its 'label'");
    }
    if (!shape.contains("points") || !shape["points"].is_array()) {
      throw SchemaError("shape is missing its 'points' array");
    }
    RawShape raw;
    raw.bird_id = bird_id_from_label(shape["label"]);
    for (const json& pt : shape["points"]) {
      raw.points.push_back(point_from_json(pt));
    }
    out.push_back(std::move(raw));
  }
  return out;
}

std::string serialize_polygon_json(std::span<const RawShape> shapes) {
  ordered_json doc;
  doc["shapes"] = ordered_json::array();
  for (const RawShape& shape : shapes) {
    ordered_json s;
    s["label"] = std::to_string(shape.bird_id);
    ordered_json pts = ordered_json::array();
    for (const Point& p : shape.points) pts.push_back(point_to_json(p));
    s["points"] = std::move(pts);
    doc["shapes"].push_back(std::move(s));
  }
  return doc.dump(2) + "\n";
}

std::vector<EthogramRow> parse_ethogram_csv(std::string_view bytes) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= bytes.size()) {
    std::size_t nl = bytes.find('\n', start);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) {
    throw ParseError("ethogram CSV is empty", ParseError::npos, 0);
  }

  // Header: all 15 columns must be present, nothing else. Matching is
  // case-insensitive; data is read through the resulting column map.
  const auto header_cells = split_line(lines[0]);
  std::array<int, 15> column_of{};
  column_of.fill(-1);
  for (std::size_t c = 0; c < header_cells.size(); ++c) {
    const std::string name = lower(trim(header_cells[c]));
    bool known = false;
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
      if (name == lower(kColumns[k])) {
        if (column_of[k] != -1) {
          throw SchemaError("duplicate column '" + std::string(kColumns[k]) +
                            "'");
        }
        column_of[k] = static_cast<int>(c);
        known = true;
        break;
      }
    }
    if (!known) {
      throw SchemaError("unknown column '" +
                        std::string(trim(header_cells[c])) + "'");
    }
  }
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    if (column_of[k] == -1) {
      throw SchemaError("missing column '" + std::string(kColumns[k]) + "'");
    }
  }

  std::vector<EthogramRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t row_number = i;  // 1-based data row
    const auto cells = split_line(lines[i]);
    if (cells.size() != kColumns.size()) {
      throw ParseError("row " + std::to_string(row_number) + ": expected " +
                           std::to_string(kColumns.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       ParseError::npos, row_number);
    }
    EthogramRow row;
    row.date = std::string(cells[column_of[0]]);
    row.image = std::string(cells[column_of[1]]);
    row.time = std::string(cells[column_of[2]]);
    row.bird_id = parse_int_cell(cells[column_of[3]], row_number, "bird ID");
    if (row.bird_id <= 0) {
      throw ParseError("row " + std::to_string(row_number) +
                           ": bird ID must be positive",
                       ParseError::npos, row_number);
    }
    for (int f = 0; f < kFlagCount; ++f) {
      const std::string_view cell = cells[column_of[kFirstFlagColumn + f]];
      if (cell == "0") {
        row.flags[f] = 0;
      } else if (cell == "1") {
        row.flags[f] = 1;
      } else {
        throw ParseError("row " + std::to_string(row_number) + ": flag " +
                             std::string(kColumns[kFirstFlagColumn + f]) +
                             " must be 0 or 1, got '" + std::string(cell) +
                             "'",
                         ParseError::npos, row_number);
      }
    }
    row.count = parse_int_cell(cells[column_of[14]], row_number, "count");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string serialize_ethogram_csv(std::span<const EthogramRow> rows) {
  std::string out;
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    if (k) out += ',';
    out += kColumns[k];
  }
  out += '\n';
  for (const EthogramRow& row : rows) {
    out += row.date;
    out += ',';
    out += row.image;
    out += ',';
    out += row.time;
    out += ',';
    out += std::to_string(row.bird_id);
    for (int f : row.flags) {
      out += ',';
      out += f ? '1' : '0';
    }
    out += ',';
    out += std::to_string(row.count);
    out += '\n';
  }
  return out;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::CountRule:
      return "CountRule";
    case ViolationCode::MultiPosture:
      return "MultiPosture";
    case ViolationCode::MultiBehavior:
      return "MultiBehavior";
    case ViolationCode::NvsConflict:
      return "NvsConflict";
    case ViolationCode::PolygonAnomaly:
      return "PolygonAnomaly";
    case ViolationCode::OrphanRow:
      return "OrphanRow";
    case ViolationCode::OrphanPolygon:
      return "OrphanPolygon";
    case ViolationCode::NvsWithPolygon:
      return "NvsWithPolygon";
  }
  return "Unknown";
}

void ValidationReport::append(const ValidationReport& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

std::string serialize_validation_report(const ValidationReport& report) {
  ordered_json doc;
  doc["violation_count"] = report.entries.size();
  ordered_json list = ordered_json::array();
  for (const Violation& v : report.entries) {
    ordered_json entry;
    entry["code"] = std::string(to_string(v.code));
    entry["video"] = v.video_id;
    entry["frame"] = v.frame_index;
    entry["row"] = v.row;
    entry["bird_id"] = v.bird_id;
    if (v.anomaly) entry["anomaly"] = std::string(to_string(*v.anomaly));
    entry["detail"] = v.detail;
    list.push_back(std::move(entry));
  }
  doc["violations"] = std::move(list);
  return doc.dump(2) + "\n";
}

ValidationReport validate_rows(std::span<const EthogramRow> rows) {
  ValidationReport report;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const EthogramRow& row = rows[i];
    const std::size_t row_number = i + 1;
    std::int64_t frame = -1;
    try {
      frame = frame_index_from_stem(row.image);
    } catch (const SchemaError&) {
      frame = -1;
    }
    const auto make = [&](ViolationCode code, std::string detail) {
      Violation v;
      v.code = code;
      v.frame_index = frame;
      v.row = row_number;
      v.bird_id = row.bird_id;
      v.detail = std::move(detail);
      report.add(std::move(v));
    };

    const int posture_flags = row.flags[0] + row.flags[1] + row.flags[2];
    const int behavior_flags = row.flags[3] + row.flags[4] + row.flags[5] +
                               row.flags[6] + row.flags[7] + row.flags[8];
    const int sum = row.flag_sum();
    if (row.count != sum || row.count < 1 || row.count > 2) {
      make(ViolationCode::CountRule,
           "count=" + std::to_string(row.count) + ", flag sum=" +
               std::to_string(sum));
    }
    if (posture_flags > 1) {
      make(ViolationCode::MultiPosture,
           std::to_string(posture_flags) + " posture flags set");
    }
    if (behavior_flags > 1) {
      make(ViolationCode::MultiBehavior,
           std::to_string(behavior_flags) + " behavior flags set");
    }
    if (row.nvs() && (posture_flags + behavior_flags) > 0) {
      make(ViolationCode::NvsConflict, "NVS set together with other flags");
    }
  }
  return report;
}

bool BirdAnnotation::matchable() const {
  if (!polygon) return false;
  for (PolygonAnomaly a : anomalies) {
    if (excludes_from_matching(a)) return false;
  }
  return true;
}

std::optional<Behavior> effective_behavior(const BirdAnnotation& bird) {
  if (!bird.visible) return std::nullopt;
  if (bird.behavior) return bird.behavior;
  if (bird.posture) return Behavior::Control;
  return std::nullopt;
}

std::span<const std::string_view> valid_prediction_labels() {
  return kPredictionLabels;
}

bool is_posture_label(std::string_view label) {
  return label == "WLK" || label == "SIT" || label == "STD" || label == "STA";
}

bool is_behavior_label(std::string_view label) {
  return behavior_from_code(label).has_value();
}

std::vector<Prediction> parse_predictions(std::string_view bytes) {
  std::vector<Prediction> preds;
  std::size_t start = 0;
  std::size_t line_number = 0;
  while (start < bytes.size()) {
    std::size_t nl = bytes.find('\n', start);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(start, nl - start);
    start = nl + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_number) + ": " + e.what(),
                       e.byte, line_number);
    }
    if (!rec.is_object()) {
      throw SchemaError("line " + std::to_string(line_number) +
                        ": record must be a JSON object");
    }
    Prediction p;
    if (!rec.contains("video") || !rec["video"].is_string()) {
      throw SchemaError("line " + std::to_string(line_number) +
                        ": missing 'video'");
    }
    p.video_id = rec["video"].get<std::string>();
    if (!rec.contains("frame") || !rec["frame"].is_number_integer() ||
        rec["frame"].get<std::int64_t>() < 0) {
      throw SchemaError("line " + std::to_string(line_number) +
                        ": 'frame' must be a non-negative integer");
    }
    p.frame_index = rec["frame"].get<std::int64_t>();

    if (rec.contains("bbox")) {
      const json& b = rec["bbox"];
      if (!b.is_array() || b.size() != 4) {
        throw SchemaError("line " + std::to_string(line_number) +
                          ": 'bbox' must be [x_min,y_min,x_max,y_max]");
      }
      BBox box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
               b[3].get<double>()};
      if (!box.valid()) {
        throw ParseError("line " + std::to_string(line_number) +
                             ": bbox is empty or inverted",
                         ParseError::npos, line_number);
      }
      p.bbox = box;
    }
    if (rec.contains("polygon")) {
      const json& poly = rec["polygon"];
      if (!poly.is_array() || poly.size() != 16) {
        throw SchemaError("line " + std::to_string(line_number) +
                          ": 'polygon' must hold 16 numbers");
      }
      Polygon8 pg;
      for (int i = 0; i < 8; ++i) {
        pg.points[i] = Point{poly[2 * i].get<double>(),
                             poly[2 * i + 1].get<double>()};
      }
      p.polygon = pg;
      if (!p.bbox) {
        try {
          p.bbox = polygon_to_bbox(pg);
        } catch (const InvalidGeometry& e) {
          throw ParseError("line " + std::to_string(line_number) + ": " +
                               e.what(),
                           ParseError::npos, line_number);
        }
      }
    }
    if (!p.bbox) {
      throw SchemaError("line " + std::to_string(line_number) +
                        ": record carries neither 'bbox' nor 'polygon'");
    }
    if (!rec.contains("label") || !rec["label"].is_string()) {
      throw SchemaError("line " + std::to_string(line_number) +
                        ": missing 'label'");
    }
    p.label = rec["label"].get<std::string>();
    if (std::find(kPredictionLabels.begin(), kPredictionLabels.end(),
                  p.label) == kPredictionLabels.end()) {
      std::string valid;
      for (std::string_view l : kPredictionLabels) {
        if (!valid.empty()) valid += ' ';
        valid += l;
      }
      throw SchemaError("line " + std::to_string(line_number) +
                        ": unknown class name '" + p.label +
                        "' (valid: " + valid + ")");
    }
    if (!rec.contains("score") || !rec["score"].is_number()) {
      throw SchemaError("line " + std::to_string(line_number) +
                        ": missing 'score'");
    }
    p.score = rec["score"].get<double>();
    if (!(p.score >= 0.0 && p.score <= 1.0)) {
      throw ParseError("line " + std::to_string(line_number) +
                           ": score outside [0,1]",
                       ParseError::npos, line_number);
    }
    preds.push_back(std::move(p));
  }
  return preds;
}

std::string serialize_predictions(std::span<const Prediction> preds) {
  std::string out;
  for (const Prediction& p : preds) {
    ordered_json rec;
    rec["video"] = p.video_id;
    rec["frame"] = p.frame_index;
    if (p.bbox) {
      rec["bbox"] = ordered_json{p.bbox->x_min, p.bbox->y_min, p.bbox->x_max,
                                 p.bbox->y_max};
    }
    if (p.polygon) {
      ordered_json poly = ordered_json::array();
      for (const Point& pt : p.polygon->points) {
        poly.push_back(pt.x);
        poly.push_back(pt.y);
      }
      rec["polygon"] = std::move(poly);
    }
    rec["label"] = p.label;
    rec["score"] = p.score;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::vector<std::string> DatasetManifest::video_ids() const {
  std::vector<std::string> ids;
  ids.reserve(videos.size());
  for (const VideoSource& v : videos) ids.push_back(v.video_id);
  return ids;
}

DatasetManifest parse_manifest(std::string_view bytes) {
  const json doc = parse_json_or_throw(bytes);
  if (!doc.is_object()) throw SchemaError("manifest must be a JSON object");
  DatasetManifest m;
  if (!doc.contains("camera_id") || !doc["camera_id"].is_number_integer()) {
    throw SchemaError("manifest missing integer 'camera_id'");
  }
  m.camera_id = doc["camera_id"].get<int>();
  if (m.camera_id < 1 || m.camera_id > 3) {
    throw SchemaError("camera_id must be 1, 2, or 3");
  }
  if (!doc.contains("frame_width") || !doc.contains("frame_height") ||
      !doc["frame_width"].is_number() || !doc["frame_height"].is_number()) {
    throw SchemaError("manifest missing numeric frame dimensions");
  }
  m.frame_width = doc["frame_width"].get<double>();
  m.frame_height = doc["frame_height"].get<double>();
  if (m.frame_width <= 0.0 || m.frame_height <= 0.0) {
    throw SchemaError("frame dimensions must be positive");
  }
  if (!doc.contains("videos") || !doc["videos"].is_array() ||
      doc["videos"].empty()) {
    throw SchemaError("manifest must list at least one video");
  }
  std::set<std::string> seen;
  for (const json& v : doc["videos"]) {
    if (!v.is_object() || !v.contains("video_id")) {
      throw SchemaError("video entry missing 'video_id'");
    }
    VideoSource src;
    if (v["video_id"].is_string()) {
      src.video_id = v["video_id"].get<std::string>();
    } else if (v["video_id"].is_number_integer()) {
      src.video_id = std::to_string(v["video_id"].get<std::int64_t>());
    } else {
      throw SchemaError("'video_id' must be a string");
    }
    if (!seen.insert(src.video_id).second) {
      throw SchemaError("duplicate video_id '" + src.video_id + "'");
    }
    if (v.contains("polygon_dir")) {
      src.polygon_dir = v["polygon_dir"].get<std::string>();
    }
    if (v.contains("ethogram_csv")) {
      src.ethogram_csv = v["ethogram_csv"].get<std::string>();
    }
    m.videos.push_back(std::move(src));
  }
  return m;
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  ordered_json doc;
  doc["camera_id"] = manifest.camera_id;
  doc["frame_width"] = manifest.frame_width;
  doc["frame_height"] = manifest.frame_height;
  ordered_json videos = ordered_json::array();
  for (const VideoSource& v : manifest.videos) {
    ordered_json entry;
    entry["video_id"] = v.video_id;
    entry["polygon_dir"] = v.polygon_dir;
    entry["ethogram_csv"] = v.ethogram_csv;
    videos.push_back(std::move(entry));
  }
  doc["videos"] = std::move(videos);
  return doc.dump(2) + "\n";
}

std::int64_t frame_index_from_stem(std::string_view name) {
  std::string stem = lower(trim(name));
  // Strip a real extension (letters allowed, e.g. ".json", ".png"), but not
  // a numeric suffix after a dot.
  const std::size_t dot = stem.rfind('.');
  if (dot != std::string::npos && dot + 1 < stem.size()) {
    const std::string_view ext = std::string_view(stem).substr(dot + 1);
    const bool has_alpha = std::any_of(ext.begin(), ext.end(), [](char c) {
      return std::isalpha(static_cast<unsigned char>(c));
    });
    const bool alnum = std::all_of(ext.begin(), ext.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c));
    });
    if (has_alpha && alnum) stem.resize(dot);
  }
  std::size_t end = stem.size();
  while (end > 0 && std::isdigit(static_cast<unsigned char>(stem[end - 1]))) {
    --end;
  }
  if (end == stem.size()) {
    throw SchemaError("cannot derive a frame index from '" +
                      std::string(name) + "'");
  }
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(stem.data() + end, stem.data() + stem.size(), value);
  if (ec != std::errc()) {
    throw SchemaError("frame index out of range in '" + std::string(name) +
                      "'");
  }
  return value;
}

MergeResult merge_annotations(std::span<const PolygonFrame> polygon_frames,
                              std::span<const VideoRows> rows,
                              const DatasetManifest& manifest) {
  MergeResult result;

  // Row-level sanity checks first, tagged with their video.
  std::set<std::string> invalid_rows;  // "video:rownum" keys of bad rows
  for (const VideoRows& vr : rows) {
    ValidationReport row_report = validate_rows(vr.rows);
    for (Violation& v : row_report.entries) {
      v.video_id = vr.video_id;
      invalid_rows.insert(vr.video_id + ":" + std::to_string(v.row));
      result.report.add(std::move(v));
    }
  }

  // Index both sources by (video, frame, bird).
  std::map<std::string, std::map<std::int64_t, FrameBirds>> by_video;
  for (const PolygonFrame& pf : polygon_frames) {
    FrameBirds& fb = by_video[pf.video_id][pf.frame_index];
    for (const RawShape& shape : pf.shapes) {
      if (!fb.shapes.emplace(shape.bird_id, &shape).second) {
        throw MergeError("duplicate bird " + std::to_string(shape.bird_id) +
                         " in video " + pf.video_id + " frame " +
                         std::to_string(pf.frame_index));
      }
    }
  }
  for (const VideoRows& vr : rows) {
    for (std::size_t i = 0; i < vr.rows.size(); ++i) {
      const EthogramRow& row = vr.rows[i];
      std::int64_t frame = -1;
      try {
        frame = frame_index_from_stem(row.image);
      } catch (const SchemaError& e) {
        Violation v;
        v.code = ViolationCode::OrphanRow;
        v.video_id = vr.video_id;
        v.row = i + 1;
        v.bird_id = row.bird_id;
        v.detail = e.what();
        result.report.add(std::move(v));
        continue;
      }
      FrameBirds& fb = by_video[vr.video_id][frame];
      if (!fb.rows.emplace(row.bird_id, std::make_pair(&row, i + 1)).second) {
        throw MergeError("duplicate bird " + std::to_string(row.bird_id) +
                         " in video " + vr.video_id + " frame " +
                         std::to_string(frame));
      }
    }
  }

  // Walk videos in manifest order, frames ascending, birds ascending.
  for (const VideoSource& source : manifest.videos) {
    const auto video_it = by_video.find(source.video_id);
    if (video_it == by_video.end()) continue;
    for (const auto& [frame_index, fb] : video_it->second) {
      FrameAnnotation frame;
      frame.video_id = source.video_id;
      frame.frame_index = frame_index;

      std::set<int> bird_ids;
      for (const auto& [id, _] : fb.shapes) bird_ids.insert(id);
      for (const auto& [id, _] : fb.rows) bird_ids.insert(id);

      for (int bird_id : bird_ids) {
        const auto shape_it = fb.shapes.find(bird_id);
        const auto row_it = fb.rows.find(bird_id);
        const RawShape* shape =
            shape_it != fb.shapes.end() ? shape_it->second : nullptr;
        const EthogramRow* row =
            row_it != fb.rows.end() ? row_it->second.first : nullptr;
        const std::size_t row_number =
            row_it != fb.rows.end() ? row_it->second.second : 0;

        const auto report_violation = [&](ViolationCode code,
                                          std::string detail,
                                          std::optional<PolygonAnomaly> a =
                                              std::nullopt) {
          Violation v;
          v.code = code;
          v.video_id = source.video_id;
          v.frame_index = frame_index;
          v.row = row_number;
          v.bird_id = bird_id;
          v.anomaly = a;
          v.detail = std::move(detail);
          result.report.add(std::move(v));
        };

        std::vector<PolygonAnomaly> anomalies;
        if (shape != nullptr) {
          anomalies = validate_polygon(shape->points, manifest.frame_width,
                                       manifest.frame_height);
          for (PolygonAnomaly a : anomalies) {
            report_violation(ViolationCode::PolygonAnomaly,
                             std::string(to_string(a)), a);
          }
        }

        if (row == nullptr) {
          report_violation(ViolationCode::OrphanPolygon,
                           "polygon has no ethogram row");
          continue;
        }
        const bool row_valid =
            invalid_rows.find(source.video_id + ":" +
                              std::to_string(row_number)) ==
            invalid_rows.end();
        if (!row_valid) continue;  // already reported by validate_rows

        if (row->nvs()) {
          if (shape != nullptr) {
            report_violation(ViolationCode::NvsWithPolygon,
                             "bird marked NVS but a polygon exists");
          }
          BirdAnnotation bird;
          bird.bird_id = bird_id;
          bird.visible = false;
          frame.birds.push_back(std::move(bird));
          continue;
        }
        if (shape == nullptr) {
          report_violation(ViolationCode::OrphanRow,
                           "ethogram row has no polygon");
          continue;
        }

        BirdAnnotation bird;
        bird.bird_id = bird_id;
        bird.raw_points = shape->points;
        bird.anomalies = anomalies;
        bird.posture = row->posture();
        bird.behavior = row->behavior();
        bird.visible = true;
        bool finite = true;
        for (const Point& p : shape->points) {
          if (!std::isfinite(p.x) || !std::isfinite(p.y)) finite = false;
        }
        if (shape->points.size() == Polygon8::kVertexCount && finite) {
          Polygon8 poly;
          std::copy(shape->points.begin(), shape->points.end(),
                    poly.points.begin());
          bird.polygon = poly;
        }
        frame.birds.push_back(std::move(bird));
      }
      result.frames.push_back(std::move(frame));
    }
  }
  return result;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

LoadedDataset load_dataset(const std::filesystem::path& manifest_path) {
  LoadedDataset dataset;
  const std::string manifest_bytes = read_file(manifest_path);
  dataset.manifest = parse_manifest(manifest_bytes);
  const std::filesystem::path base = manifest_path.parent_path();

  std::vector<PolygonFrame> polygon_frames;
  std::vector<VideoRows> rows;
  for (const VideoSource& video : dataset.manifest.videos) {
    if (!video.polygon_dir.empty()) {
      const std::filesystem::path dir = base / video.polygon_dir;
      if (!std::filesystem::is_directory(dir)) {
        throw IoError("polygon directory not found: " + dir.string());
      }
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
          files.push_back(entry.path());
        }
      }
      std::sort(files.begin(), files.end());
      for (const auto& file : files) {
        PolygonFrame pf;
        pf.video_id = video.video_id;
        pf.frame_index = frame_index_from_stem(file.filename().string());
        try {
          pf.shapes = parse_polygon_json(read_file(file));
        } catch (const ParseError& e) {
          throw ParseError(file.string() + ": " + e.what(), e.byte_offset(),
                           e.row());
        }
        polygon_frames.push_back(std::move(pf));
      }
    }
    if (!video.ethogram_csv.empty()) {
      const std::filesystem::path csv = base / video.ethogram_csv;
      VideoRows vr;
      vr.video_id = video.video_id;
      try {
        vr.rows = parse_ethogram_csv(read_file(csv));
      } catch (const ParseError& e) {
        throw ParseError(csv.string() + ": " + e.what(), e.byte_offset(),
                         e.row());
      }
      rows.push_back(std::move(vr));
    }
  }

  MergeResult merged =
      merge_annotations(polygon_frames, rows, dataset.manifest);
  dataset.frames = std::move(merged.frames);
  dataset.report = std::move(merged.report);
  return dataset;
}

}  // namespace flockeval
