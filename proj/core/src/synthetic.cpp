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
#include "flockeval/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "flockeval/errors.hpp"
#include "flockeval/rng.hpp"
#include "json.hpp"

namespace flockeval {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Stream purposes, so no two draws ever share an RNG sequence.
constexpr std::uint64_t kAttrStream = 1;
constexpr std::uint64_t kPlaceStream = 2;
constexpr std::uint64_t kFrameStream = 3;
constexpr std::uint64_t kCorruptStream = 4;
constexpr std::uint64_t kSpuriousStream = 5;

struct BirdAttributes {
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double rotation = 0.0;
  double home_x = 0.0;
  double home_y = 0.0;
  double amp_x = 0.0;
  double amp_y = 0.0;
  double omega_x = 0.0;
  double omega_y = 0.0;
  double phase_x = 0.0;
  double phase_y = 0.0;
  // Everything the bird can reach stays inside home +/- reach on each axis.
  double reach = 0.0;
};

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

std::string format_video_id(const std::string& prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d", index + 1);
  return prefix + buf;
}

std::string format_frame_stem(const std::string& video_id,
                              std::int64_t frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%06lld",
                static_cast<long long>(frame));
  return video_id + buf;
}

std::string format_time(std::int64_t frame) {
  const std::int64_t seconds = 6 * 3600 + frame;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld",
                static_cast<long long>(seconds / 3600),
                static_cast<long long>((seconds / 60) % 60),
                static_cast<long long>(seconds % 60));
  return buf;
}

void check_distribution(std::span<const double> dist, const char* what) {
  double sum = 0.0;
  for (double p : dist) {
    if (p < 0.0) {
      throw GenerationError(std::string(what) +
                            " has a negative probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw GenerationError(std::string(what) + " does not sum to 1");
  }
}

void check_scene_config(const SceneConfig& cfg) {
  if (cfg.bird_count < 1 || cfg.frame_count < 1 || cfg.video_count < 1) {
    throw GenerationError("bird, frame, and video counts must be positive");
  }
  if (cfg.frame_width <= 0.0 || cfg.frame_height <= 0.0) {
    throw GenerationError("frame dimensions must be positive");
  }
  check_distribution(cfg.behavior_distribution, "behavior distribution");
  check_distribution(cfg.posture_distribution, "posture distribution");
  if (cfg.nvs_rate < 0.0 || cfg.nvs_rate > 1.0) {
    throw GenerationError("nvs_rate must be in [0, 1]");
  }
  if (cfg.min_semi_major <= 0.0 || cfg.max_semi_major < cfg.min_semi_major ||
      cfg.min_aspect <= 0.0 || cfg.max_aspect < cfg.min_aspect ||
      cfg.max_aspect > 1.0) {
    throw GenerationError("invalid body geometry range");
  }
  if (cfg.radial_noise < 0.0 || cfg.radial_noise >= 1.0) {
    throw GenerationError("radial_noise must be in [0, 1)");
  }
  if (cfg.wander_amplitude < 0.0 || cfg.min_separation < 0.0 ||
      cfg.frame_margin < 0.0) {
    throw GenerationError("motion and spacing parameters must be >= 0");
  }
}

// Axis-wise gap between two square footprints centered at (x1,y1), (x2,y2)
// with half-sides r1, r2. Positive in either axis means disjoint boxes.
double footprint_gap(double x1, double y1, double r1, double x2, double y2,
                     double r2) {
  const double gap_x = std::abs(x1 - x2) - (r1 + r2);
  const double gap_y = std::abs(y1 - y2) - (r1 + r2);
  return std::max(gap_x, gap_y);
}

std::vector<BirdAttributes> place_birds(const SceneConfig& cfg,
                                        std::uint64_t seed,
                                        std::uint64_t video) {
  std::vector<BirdAttributes> birds;
  birds.reserve(static_cast<std::size_t>(cfg.bird_count));
  Rng place = Rng::stream(seed, kPlaceStream, video);
  for (int b = 0; b < cfg.bird_count; ++b) {
    Rng attr = Rng::stream(seed, kAttrStream, video,
                           static_cast<std::uint64_t>(b));
    BirdAttributes bird;
    bird.semi_major = attr.uniform(cfg.min_semi_major, cfg.max_semi_major);
    bird.semi_minor =
        bird.semi_major * attr.uniform(cfg.min_aspect, cfg.max_aspect);
    bird.rotation = attr.uniform(0.0, kTwoPi);
    bird.amp_x = cfg.wander_amplitude * attr.uniform(0.3, 1.0);
    bird.amp_y = cfg.wander_amplitude * attr.uniform(0.3, 1.0);
    bird.omega_x = attr.uniform(0.05, 0.35);
    bird.omega_y = attr.uniform(0.05, 0.35);
    bird.phase_x = attr.uniform(0.0, kTwoPi);
    bird.phase_y = attr.uniform(0.0, kTwoPi);
    bird.reach = bird.semi_major * (1.0 + cfg.radial_noise) +
                 std::max(bird.amp_x, bird.amp_y);

    const double lo_x = cfg.frame_margin + bird.reach;
    const double hi_x = cfg.frame_width - cfg.frame_margin - bird.reach;
    const double lo_y = cfg.frame_margin + bird.reach;
    const double hi_y = cfg.frame_height - cfg.frame_margin - bird.reach;
    if (lo_x >= hi_x || lo_y >= hi_y) {
      throw GenerationError("frame too small for the configured bird size");
    }

    bool placed = false;
    for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
      bird.home_x = place.uniform(lo_x, hi_x);
      bird.home_y = place.uniform(lo_y, hi_y);
      placed = true;
      for (const BirdAttributes& other : birds) {
        if (footprint_gap(bird.home_x, bird.home_y, bird.reach, other.home_x,
                          other.home_y,
                          other.reach) < cfg.min_separation) {
          placed = false;
          break;
        }
      }
    }
    if (!placed) {
      throw GenerationError("cannot place " + std::to_string(cfg.bird_count) +
                            " birds without overlap; frame is too crowded");
    }
    birds.push_back(bird);
  }
  return birds;
}

Polygon8 translated(const Polygon8& p, double dx, double dy) {
  Polygon8 out = p;
  for (Point& pt : out.points) {
    pt.x += dx;
    pt.y += dy;
  }
  return out;
}

std::int64_t poisson_draw(Rng& rng, double lambda) {
  if (lambda <= 0.0) return 0;
  const double limit = std::exp(-lambda);
  std::int64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= rng.uniform();
  } while (p > limit);
  return k - 1;
}

std::vector<std::string> default_labels(LabelKind kind) {
  std::vector<std::string> labels;
  if (kind == LabelKind::Behavior) {
    for (Behavior b : kAllBehaviors) labels.emplace_back(code_of(b));
  } else {
    for (Posture p : kAllPostures) labels.emplace_back(code_of(p));
  }
  return labels;
}

}  // namespace

Polygon8 sample_blob(double cx, double cy, double semi_major,
                     double semi_minor, double rotation, double radial_noise,
                     std::uint64_t vertex_key) {
  Rng rng(vertex_key);
  const double cos_r = std::cos(rotation);
  const double sin_r = std::sin(rotation);
  Polygon8 poly;
  for (int i = 0; i < 8; ++i) {
    const double t = kTwoPi * static_cast<double>(i) / 8.0;
    const double radius = 1.0 + radial_noise * (2.0 * rng.uniform() - 1.0);
    const double lx = semi_major * radius * std::cos(t);
    const double ly = semi_minor * radius * std::sin(t);
    poly.points[static_cast<std::size_t>(i)] =
        Point{cx + cos_r * lx - sin_r * ly, cy + sin_r * lx + cos_r * ly};
  }
  return poly;
}

SyntheticScene generate_scene(const SceneConfig& cfg, std::uint64_t seed) {
  check_scene_config(cfg);
  SyntheticScene scene;
  scene.manifest.camera_id = cfg.camera_id;
  scene.manifest.frame_width = cfg.frame_width;
  scene.manifest.frame_height = cfg.frame_height;
  scene.separation_guarantee = cfg.min_separation;

  for (int v = 0; v < cfg.video_count; ++v) {
    const std::string video_id = format_video_id(cfg.video_prefix, v);
    VideoSource source;
    source.video_id = video_id;
    source.polygon_dir = "polygons/" + video_id;
    source.ethogram_csv = video_id + ".csv";
    scene.manifest.videos.push_back(source);

    const std::vector<BirdAttributes> birds =
        place_birds(cfg, seed, static_cast<std::uint64_t>(v));

    for (int t = 0; t < cfg.frame_count; ++t) {
      FrameAnnotation frame;
      frame.video_id = video_id;
      frame.frame_index = t;
      for (int b = 0; b < cfg.bird_count; ++b) {
        Rng rng = Rng::stream(
            seed, kFrameStream,
            (static_cast<std::uint64_t>(v) << 20) |
                static_cast<std::uint64_t>(b),
            static_cast<std::uint64_t>(t));
        BirdAnnotation bird;
        bird.bird_id = b + 1;
        if (rng.uniform() < cfg.nvs_rate) {
          bird.visible = false;
          frame.birds.push_back(std::move(bird));
          continue;
        }
        bird.posture = kAllPostures[rng.categorical(cfg.posture_distribution)];
        const Behavior behavior =
            kAllBehaviors[rng.categorical(cfg.behavior_distribution)];
        if (behavior != Behavior::Control) bird.behavior = behavior;

        const BirdAttributes& attr = birds[static_cast<std::size_t>(b)];
        const double td = static_cast<double>(t);
        const double cx =
            attr.home_x + attr.amp_x * std::sin(attr.omega_x * td +
                                                attr.phase_x);
        const double cy =
            attr.home_y + attr.amp_y * std::sin(attr.omega_y * td +
                                                attr.phase_y);
        bird.polygon = sample_blob(cx, cy, attr.semi_major, attr.semi_minor,
                                   attr.rotation, cfg.radial_noise,
                                   rng.next());
        bird.raw_points.assign(bird.polygon->points.begin(),
                               bird.polygon->points.end());
        frame.birds.push_back(std::move(bird));
      }
      scene.frames.push_back(std::move(frame));
    }
  }
  return scene;
}

void write_scene(const SyntheticScene& scene,
                 const std::filesystem::path& dir) {
  write_file(dir / "manifest.json", serialize_manifest(scene.manifest));

  std::map<std::string, std::vector<EthogramRow>> rows_per_video;
  for (const FrameAnnotation& frame : scene.frames) {
    std::vector<RawShape> shapes;
    const std::string stem =
        format_frame_stem(frame.video_id, frame.frame_index);
    for (const BirdAnnotation& bird : frame.birds) {
      EthogramRow row;
      row.date = "2020-05-12";
      row.image = stem;
      row.time = format_time(frame.frame_index);
      row.bird_id = bird.bird_id;
      if (!bird.visible) {
        row.flags[9] = 1;
      } else {
        if (bird.posture) {
          row.flags[static_cast<std::size_t>(*bird.posture)] = 1;
        }
        if (bird.behavior) {
          row.flags[3 + static_cast<std::size_t>(*bird.behavior)] = 1;
        }
        RawShape shape;
        shape.bird_id = bird.bird_id;
        shape.points = bird.raw_points;
        shapes.push_back(std::move(shape));
      }
      row.count = row.flag_sum();
      rows_per_video[frame.video_id].push_back(std::move(row));
    }
    const VideoSource* source = nullptr;
    for (const VideoSource& v : scene.manifest.videos) {
      if (v.video_id == frame.video_id) source = &v;
    }
    write_file(dir / source->polygon_dir / (stem + ".json"),
               serialize_polygon_json(shapes));
  }
  for (const VideoSource& v : scene.manifest.videos) {
    write_file(dir / v.ethogram_csv,
               serialize_ethogram_csv(rows_per_video[v.video_id]));
  }
}

std::string_view to_string(PredictionOrigin origin) {
  return origin == PredictionOrigin::Jittered ? "jittered" : "spurious";
}

std::string gt_class_label(const BirdAnnotation& bird, LabelKind kind) {
  if (kind == LabelKind::Behavior) {
    const std::optional<Behavior> b = effective_behavior(bird);
    return b ? std::string(code_of(*b)) : std::string();
  }
  return bird.visible && bird.posture ? std::string(code_of(*bird.posture))
                                      : std::string();
}

CorruptionResult corrupt(const SyntheticScene& scene,
                         const NoiseConfig& noise, std::uint64_t seed) {
  if (noise.drop_rate < 0.0 || noise.drop_rate > 1.0 ||
      noise.false_positive_rate < 0.0 || noise.jitter_sigma < 0.0) {
    throw GenerationError("invalid noise rates");
  }
  if (!noise.confusion_classes.empty()) {
    if (noise.label_confusion.size() != noise.confusion_classes.size()) {
      throw GenerationError("label confusion matrix is not square");
    }
    for (const auto& row : noise.label_confusion) {
      if (row.size() != noise.confusion_classes.size()) {
        throw GenerationError("label confusion matrix is not square");
      }
      check_distribution(row, "label confusion row");
    }
  }

  // A moved prediction must never reach another bird's footprint.
  const double jitter_limit =
      std::min(3.0 * noise.jitter_sigma,
               0.45 * scene.separation_guarantee);

  std::map<std::string, std::uint64_t> video_index;
  for (std::size_t i = 0; i < scene.manifest.videos.size(); ++i) {
    video_index[scene.manifest.videos[i].video_id] = i;
  }
  const std::vector<std::string> spurious_labels =
      noise.confusion_classes.empty() ? default_labels(noise.label_kind)
                                      : noise.confusion_classes;

  CorruptionResult result;
  for (const FrameAnnotation& frame : scene.frames) {
    const std::uint64_t v = video_index.at(frame.video_id);
    Rng rng = Rng::stream(seed, kCorruptStream, v,
                          static_cast<std::uint64_t>(frame.frame_index));

    std::vector<BBox> gt_boxes;
    for (const BirdAnnotation& bird : frame.birds) {
      if (!bird.matchable()) continue;
      ++result.ledger.total_gt;
      const BBox gt_box = polygon_to_bbox(*bird.polygon);
      gt_boxes.push_back(gt_box);

      if (rng.uniform() < noise.drop_rate) {
        result.ledger.dropped.push_back(
            GtRef{frame.video_id, frame.frame_index, bird.bird_id});
        continue;
      }
      const double dx = std::clamp(noise.jitter_sigma * rng.normal(),
                                   -jitter_limit, jitter_limit);
      const double dy = std::clamp(noise.jitter_sigma * rng.normal(),
                                   -jitter_limit, jitter_limit);
      const Polygon8 moved = translated(*bird.polygon, dx, dy);

      LedgerEntry entry;
      entry.origin = PredictionOrigin::Jittered;
      entry.video_id = frame.video_id;
      entry.frame_index = frame.frame_index;
      entry.gt_bird_id = bird.bird_id;
      entry.iou_bbox = bbox_iou(gt_box, polygon_to_bbox(moved));
      entry.iou_polygon =
          polygon_iou(*bird.polygon, moved, noise.iou_resolution);
      entry.gt_label = gt_class_label(bird, noise.label_kind);
      entry.emitted_label = entry.gt_label;
      if (!noise.confusion_classes.empty()) {
        const auto it =
            std::find(noise.confusion_classes.begin(),
                      noise.confusion_classes.end(), entry.gt_label);
        if (it != noise.confusion_classes.end()) {
          const std::size_t row = static_cast<std::size_t>(
              it - noise.confusion_classes.begin());
          entry.emitted_label = noise.confusion_classes[rng.categorical(
              noise.label_confusion[row])];
        }
      }
      entry.score = clamp01(noise.score_model.base +
                            noise.score_model.iou_weight * entry.iou_bbox +
                            noise.score_model.noise_sigma * rng.normal());

      Prediction pred;
      pred.video_id = frame.video_id;
      pred.frame_index = frame.frame_index;
      pred.polygon = moved;
      pred.bbox = polygon_to_bbox(moved);
      pred.label = entry.emitted_label;
      pred.score = entry.score;
      result.predictions.push_back(std::move(pred));
      result.ledger.entries.push_back(std::move(entry));
    }

    Rng sp_rng = Rng::stream(seed, kSpuriousStream, v,
                             static_cast<std::uint64_t>(frame.frame_index));
    const std::int64_t spurious =
        poisson_draw(sp_rng, noise.false_positive_rate);
    for (std::int64_t s = 0; s < spurious; ++s) {
      for (int attempt = 0; attempt < 200; ++attempt) {
        const double semi_major = sp_rng.uniform(12.0, 28.0);
        const double semi_minor = semi_major * sp_rng.uniform(0.5, 0.7);
        const double rotation = sp_rng.uniform(0.0, kTwoPi);
        const double reach = semi_major * 1.2;
        const double cx =
            sp_rng.uniform(reach, scene.manifest.frame_width - reach);
        const double cy =
            sp_rng.uniform(reach, scene.manifest.frame_height - reach);
        const Polygon8 blob = sample_blob(cx, cy, semi_major, semi_minor,
                                          rotation, 0.1, sp_rng.next());
        const BBox box = polygon_to_bbox(blob);
        bool clear = true;
        for (const BBox& gt_box : gt_boxes) {
          const double gap =
              std::max(std::max(gt_box.x_min - box.x_max,
                                box.x_min - gt_box.x_max),
                       std::max(gt_box.y_min - box.y_max,
                                box.y_min - gt_box.y_max));
          if (gap < 1.0) {
            clear = false;
            break;
          }
        }
        if (!clear) continue;

        LedgerEntry entry;
        entry.origin = PredictionOrigin::Spurious;
        entry.video_id = frame.video_id;
        entry.frame_index = frame.frame_index;
        entry.emitted_label = spurious_labels[sp_rng.below(
            spurious_labels.size())];
        entry.score = clamp01(noise.score_model.base +
                              noise.score_model.noise_sigma * sp_rng.normal());

        Prediction pred;
        pred.video_id = frame.video_id;
        pred.frame_index = frame.frame_index;
        pred.polygon = blob;
        pred.bbox = box;
        pred.label = entry.emitted_label;
        pred.score = entry.score;
        result.predictions.push_back(std::move(pred));
        result.ledger.entries.push_back(std::move(entry));
        break;
      }
    }
  }
  return result;
}

std::string serialize_ledger(const CorruptionLedger& ledger) {
  nlohmann::ordered_json doc;
  doc["total_gt"] = ledger.total_gt;
  nlohmann::ordered_json dropped = nlohmann::ordered_json::array();
  for (const GtRef& ref : ledger.dropped) {
    nlohmann::ordered_json d;
    d["video"] = ref.video_id;
    d["frame"] = ref.frame_index;
    d["bird_id"] = ref.bird_id;
    dropped.push_back(std::move(d));
  }
  doc["dropped"] = std::move(dropped);
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const LedgerEntry& e : ledger.entries) {
    nlohmann::ordered_json j;
    j["origin"] = std::string(to_string(e.origin));
    j["video"] = e.video_id;
    j["frame"] = e.frame_index;
    j["gt_bird_id"] = e.gt_bird_id;
    j["iou_bbox"] = e.iou_bbox;
    j["iou_polygon"] = e.iou_polygon;
    j["gt_label"] = e.gt_label;
    j["emitted_label"] = e.emitted_label;
    j["score"] = e.score;
    entries.push_back(std::move(j));
  }
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

}  // namespace flockeval
