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
// Release gate for the toolkit. Each criterion is validated against an
// independent oracle (Monte Carlo sampling, longhand arithmetic, brute-force
// interpolation, or the generator's corruption ledger) and prints one
// [PASS]/[FAIL] line with the measured values; the process exits nonzero if
// any criterion fails. Tolerances are pinned next to each check.
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flockeval/errors.hpp"
#include "flockeval/folds.hpp"
#include "flockeval/geometry.hpp"
#include "flockeval/matching.hpp"
#include "flockeval/metrics.hpp"
#include "flockeval/parallel.hpp"
#include "flockeval/report.hpp"
#include "flockeval/schema.hpp"
#include "flockeval/synthetic.hpp"
#include "flockeval/welfare.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace flockeval;

namespace {

struct Outcome {
  bool pass = true;
  std::string stats;                  // headline numbers for the PASS line
  std::vector<std::string> problems;  // first few failures, for the log
  double seconds = 0.0;
};

void expect(Outcome& o, bool condition, const std::string& what) {
  if (condition) return;
  o.pass = false;
  if (o.problems.size() < 8) o.problems.push_back(what);
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// --- criterion 1: geometry against sampling and longhand arithmetic ------

Outcome polygon_and_bbox_iou_accuracy() {
  Outcome o;
  Stopwatch timer;
  const int pairs = 1000;
  const int mc_samples = 100000;

  std::vector<double> deviation(pairs, 0.0);
  parallel_for(pairs, 0, [&deviation, mc_samples](std::size_t i) {
    oracles::TestRng rng(91000 + static_cast<std::uint64_t>(i));
    const Polygon8 a = oracles::star_polygon(rng, 640.0, 360.0, 45.0, 60.0);
    const Polygon8 b = oracles::star_polygon(
        rng, 640.0 + rng.uniform(-70.0, 70.0),
        360.0 + rng.uniform(-70.0, 70.0), 45.0, 60.0);
    const double raster = polygon_iou(a, b);
    const double sampled =
        oracles::mc_iou(a, b, mc_samples, 777000 + static_cast<std::uint64_t>(i));
    deviation[i] = std::abs(raster - sampled);
  });
  const double max_dev =
      *std::max_element(deviation.begin(), deviation.end());
  expect(o, max_dev <= 0.01,
         fmt("polygon IoU drifted %.5f from the %d-sample Monte Carlo "
             "estimate (tolerance 0.01)",
             max_dev, mc_samples));

  double max_box_dev = 0.0;
  oracles::TestRng rng(4242);
  for (int i = 0; i < 1000; ++i) {
    const double ax = rng.uniform(0.0, 1200.0), ay = rng.uniform(0.0, 640.0);
    const double bx = rng.uniform(0.0, 1200.0), by = rng.uniform(0.0, 640.0);
    const BBox a{ax, ay, ax + rng.uniform(5.0, 200.0),
                 ay + rng.uniform(5.0, 160.0)};
    const BBox b{bx, by, bx + rng.uniform(5.0, 200.0),
                 by + rng.uniform(5.0, 160.0)};
    max_box_dev = std::max(
        max_box_dev, std::abs(bbox_iou(a, b) - oracles::exact_bbox_iou(a, b)));
  }
  expect(o, max_box_dev <= 1e-12,
         fmt("box IoU deviated %.3e from longhand arithmetic "
             "(tolerance 1e-12)",
             max_box_dev));

  o.seconds = timer.seconds();
  expect(o, o.seconds < 30.0,
         fmt("took %.1fs, over the 30s budget", o.seconds));
  o.stats = fmt("%d polygon pairs, max |raster - monte carlo| = %.5f "
                "(tol 0.01); 1000 box pairs exact to 1e-12",
                pairs, max_dev);
  return o;
}

// --- criterion 2: matching invariants on random frames -------------------

Outcome matching_invariants_hold_on_random_frames() {
  Outcome o;
  Stopwatch timer;
  const int frames = 10000;
  const std::vector<double> alphas = {0.1, 0.3, 0.5, 0.75, 0.9};

  std::vector<std::string> frame_problem(frames);
  parallel_for(frames, 0, [&frame_problem, &alphas](std::size_t f) {
    oracles::TestRng rng(32000 + static_cast<std::uint64_t>(f));
    const bool polygon_frame = f % 200 == 0;

    std::vector<GtGeometry> gt;
    std::vector<Prediction> preds;
    const int n_gt = 3 + static_cast<int>(rng.uniform(0.0, 10.0));
    const int n_pred = static_cast<int>(rng.uniform(0.0, 15.0));
    for (int g = 0; g < n_gt; ++g) {
      if (polygon_frame) {
        oracles::TestRng geom(rng.bits());
        const Polygon8 poly = oracles::star_polygon(
            geom, rng.uniform(80.0, 1200.0), rng.uniform(80.0, 640.0), 20.0,
            45.0);
        gt.push_back(GtGeometry{polygon_to_bbox(poly), poly});
      } else {
        const double x = rng.uniform(0.0, 1200.0);
        const double y = rng.uniform(0.0, 640.0);
        gt.push_back(GtGeometry{BBox{x, y, x + rng.uniform(8.0, 180.0),
                                     y + rng.uniform(8.0, 140.0)},
                                std::nullopt});
      }
    }
    for (int p = 0; p < n_pred; ++p) {
      Prediction pred;
      pred.video_id = "rand";
      pred.frame_index = 0;
      pred.label = "EAT";
      pred.score = rng.uniform();
      if (polygon_frame) {
        oracles::TestRng geom(rng.bits());
        pred.polygon = oracles::star_polygon(
            geom, rng.uniform(80.0, 1200.0), rng.uniform(80.0, 640.0), 20.0,
            45.0);
        pred.bbox = polygon_to_bbox(*pred.polygon);
      } else {
        const double x = rng.uniform(0.0, 1200.0);
        const double y = rng.uniform(0.0, 640.0);
        pred.bbox = BBox{x, y, x + rng.uniform(8.0, 180.0),
                         y + rng.uniform(8.0, 140.0)};
      }
      preds.push_back(std::move(pred));
    }

    std::size_t previous_pairs = gt.size() + preds.size() + 1;
    for (double alpha : alphas) {
      MatchConfig cfg;
      cfg.alpha = alpha;
      cfg.mode = polygon_frame ? IouMode::Polygon : IouMode::BBox;
      const MatchResult result = match_frame(gt, preds, cfg);

      std::set<int> used_gt, used_pred;
      for (const MatchPair& pair : result.pairs) {
        if (!used_gt.insert(pair.gt_index).second ||
            !used_pred.insert(pair.pred_index).second) {
          frame_problem[f] = fmt("frame %zu reused a side at alpha %.2f",
                                 f, alpha);
          return;
        }
        if (!(pair.iou > alpha)) {
          frame_problem[f] =
              fmt("frame %zu kept a pair at IoU %.12f <= alpha %.2f", f,
                  pair.iou, alpha);
          return;
        }
        const double recomputed =
            pair_iou(gt[static_cast<std::size_t>(pair.gt_index)],
                     preds[static_cast<std::size_t>(pair.pred_index)], cfg);
        if (pair.iou != recomputed) {
          frame_problem[f] =
              fmt("frame %zu stored IoU %.12f but recomputes %.12f", f,
                  pair.iou, recomputed);
          return;
        }
      }
      if (result.pairs.size() + result.unmatched_gt.size() != gt.size() ||
          result.pairs.size() + result.unmatched_pred.size() !=
              preds.size()) {
        frame_problem[f] = fmt("frame %zu match is not a partition", f);
        return;
      }
      if (result.pairs.size() > previous_pairs) {
        frame_problem[f] =
            fmt("frame %zu gained pairs when alpha rose to %.2f", f, alpha);
        return;
      }
      previous_pairs = result.pairs.size();
    }
  });

  int failed_frames = 0;
  for (const std::string& problem : frame_problem) {
    if (problem.empty()) continue;
    ++failed_frames;
    expect(o, false, problem);
  }
  o.seconds = timer.seconds();
  expect(o, o.seconds < 60.0,
         fmt("took %.1fs, over the 60s budget", o.seconds));
  o.stats = fmt("%d random frames (1 in 200 in polygon mode) x 5 "
                "thresholds: one-to-one pairing, strict IoU > alpha, "
                "monotone pair counts; %d frames failed",
                frames, failed_frames);
  return o;
}

// --- criterion 3: pipeline metrics equal the corruption ledger -----------

struct LedgerRunCheck {
  std::string problem;  // empty when the run matched its replay
  std::int64_t total_gt = 0;
  std::int64_t predictions = 0;
};

LedgerRunCheck run_ledgered_scene(std::uint64_t seed, IouMode mode,
                                  LabelKind kind, const SceneConfig& scene_cfg) {
  LedgerRunCheck check;
  const SyntheticScene scene = generate_scene(scene_cfg, seed);
  NoiseConfig noise;
  noise.jitter_sigma = 2.5;
  noise.drop_rate = 0.12;
  noise.false_positive_rate = 0.8;
  noise.label_kind = kind;
  if (kind == LabelKind::Behavior) {
    noise.confusion_classes = {"EAT", "CTR", "FOR"};
    noise.label_confusion = {
        {0.8, 0.15, 0.05}, {0.05, 0.9, 0.05}, {0.1, 0.2, 0.7}};
  }
  const CorruptionResult out = corrupt(scene, noise, seed ^ 0x5eedULL);
  check.total_gt = out.ledger.total_gt;
  check.predictions = static_cast<std::int64_t>(out.predictions.size());

  EvaluateConfig cfg;
  cfg.mode = mode;
  cfg.threads = 1;  // scenes already run in parallel with each other
  const MetricReport report =
      evaluate_dataset(scene.frames, out.predictions, cfg);

  std::vector<double> alphas;
  for (const auto& [alpha, ap] : report.detection.per_threshold) {
    alphas.push_back(alpha);
  }
  std::vector<std::string> classes;
  if (kind == LabelKind::Behavior) {
    for (Behavior b : kAllBehaviors) classes.emplace_back(code_of(b));
  } else {
    classes = {"STA", "WLK"};
  }
  const oracles::LedgerReplay replay =
      oracles::replay_ledger(out.ledger, alphas, mode, cfg.cls_alpha,
                             classes, kind == LabelKind::Posture);

  auto fail = [&check, seed](const std::string& what) {
    if (check.problem.empty()) {
      check.problem = fmt("seed %llu: %s",
                          static_cast<unsigned long long>(seed),
                          what.c_str());
    }
  };
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const MatchCounts& counts = report.counts[i];
    const oracles::ReplayCounts& want = replay.counts[i];
    if (counts.tp != want.tp || counts.fp != want.fp ||
        counts.fn != want.fn) {
      fail(fmt("counts at alpha %.2f diverge from the ledger "
               "(tp %lld/%lld fp %lld/%lld fn %lld/%lld)",
               alphas[i], static_cast<long long>(counts.tp),
               static_cast<long long>(want.tp),
               static_cast<long long>(counts.fp),
               static_cast<long long>(want.fp),
               static_cast<long long>(counts.fn),
               static_cast<long long>(want.fn)));
    }
    const double ap = report.detection.per_threshold[i].second;
    if (std::abs(ap - replay.ap[i]) > 1e-9) {
      fail(fmt("AP at alpha %.2f off by %.3e", alphas[i],
               std::abs(ap - replay.ap[i])));
    }
  }
  if (std::abs(report.detection.coco_map - replay.coco_map) > 1e-9) {
    fail(fmt("mean AP off by %.3e",
             std::abs(report.detection.coco_map - replay.coco_map)));
  }

  const std::optional<ClassificationReport>& view =
      kind == LabelKind::Behavior ? report.behavior : report.posture;
  const std::int64_t view_pairs = kind == LabelKind::Behavior
                                      ? report.behavior_pairs
                                      : report.posture_pairs;
  if (!view.has_value()) {
    fail("label view missing from the report");
  } else {
    if (view_pairs != replay.pairs) {
      fail(fmt("label pairs %lld but ledger replays %lld",
               static_cast<long long>(view_pairs),
               static_cast<long long>(replay.pairs)));
    }
    if (std::abs(view->accuracy - replay.labels.accuracy) > 1e-9) {
      fail("accuracy diverged from the ledger replay");
    }
    if (std::abs(view->macro_f1 - replay.labels.macro_f1) > 1e-9) {
      fail("macro F1 diverged from the ledger replay");
    }
    if (std::abs(view->weighted_f1 - replay.labels.weighted_f1) > 1e-9) {
      fail("weighted F1 diverged from the ledger replay");
    }
  }
  return check;
}

Outcome metrics_equal_ledger_replay() {
  Outcome o;
  Stopwatch timer;

  SceneConfig big;
  big.bird_count = 20;
  big.frame_count = 100;
  SceneConfig small = big;
  small.bird_count = 8;
  small.frame_count = 15;

  struct Run {
    std::uint64_t seed;
    IouMode mode;
    LabelKind kind;
    const SceneConfig* scene;
  };
  std::vector<Run> runs;
  for (std::uint64_t s = 0; s < 20; ++s) {
    runs.push_back(Run{1000 + s, IouMode::BBox,
                       s % 2 == 0 ? LabelKind::Behavior : LabelKind::Posture,
                       &big});
  }
  runs.push_back(Run{2000, IouMode::Polygon, LabelKind::Behavior, &small});
  runs.push_back(Run{2001, IouMode::Polygon, LabelKind::Posture, &small});

  std::vector<LedgerRunCheck> checks(runs.size());
  parallel_for(runs.size(), 0, [&runs, &checks](std::size_t i) {
    checks[i] = run_ledgered_scene(runs[i].seed, runs[i].mode, runs[i].kind,
                                   *runs[i].scene);
  });

  std::int64_t total_gt = 0, total_preds = 0;
  int failed = 0;
  for (const LedgerRunCheck& check : checks) {
    total_gt += check.total_gt;
    total_preds += check.predictions;
    if (!check.problem.empty()) {
      ++failed;
      expect(o, false, check.problem);
    }
  }
  o.seconds = timer.seconds();
  expect(o, o.seconds < 120.0,
         fmt("took %.1fs, over the 120s budget", o.seconds));
  o.stats = fmt("%zu corrupted scenes (20 box-mode 20x100, 2 polygon-mode), "
                "%lld ground truths, %lld predictions: counts exact, "
                "AP/accuracy/F1 within 1e-9 of the ledger replay; %d runs "
                "failed",
                runs.size(), static_cast<long long>(total_gt),
                static_cast<long long>(total_preds), failed);
  return o;
}

// --- criterion 4: ranked AP against brute-force interpolation ------------

Outcome ranked_ap_matches_brute_force() {
  Outcome o;
  Stopwatch timer;

  struct Case {
    const char* name;
    std::vector<double> scores;  // descending
    std::vector<bool> flags;
    std::int64_t total_gt;
  };
  const std::vector<Case> cases = {
      {"worked example", {0.9, 0.8, 0.7}, {true, false, true}, 3},
      {"all hits", {0.9, 0.8, 0.7, 0.6, 0.5}, {true, true, true, true, true}, 5},
      {"all misses", {0.9, 0.8, 0.7, 0.6}, {false, false, false, false}, 2},
      {"tied scores", {0.9, 0.9, 0.9}, {true, true, false}, 4},
      {"single hit", {0.4}, {true}, 1},
      {"late hit", {0.9, 0.8, 0.7}, {false, false, true}, 1},
      {"alternating",
       {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1},
       {true, false, true, false, true, false, true, false, true, false},
       6},
      {"tie then tail",
       {0.8, 0.8, 0.8, 0.5, 0.5, 0.2},
       {true, false, true, true, false, true},
       8},
  };

  for (const Case& c : cases) {
    std::vector<RankedDetection> ranked;
    for (std::size_t i = 0; i < c.scores.size(); ++i) {
      ranked.push_back(RankedDetection{c.scores[i], c.flags[i]});
    }
    const PRCurve curve = detection_pr(ranked, c.total_gt);
    const double coco = average_precision(curve, Interpolation::Coco101);
    const double all_point =
        average_precision(curve, Interpolation::AllPoint);
    const double brute_coco =
        oracles::brute_ap_101(c.scores, c.flags, c.total_gt);
    const double brute_all =
        oracles::brute_ap_allpoint(c.scores, c.flags, c.total_gt);
    expect(o, std::abs(coco - brute_coco) <= 1e-9,
           fmt("%s: 101-point AP %.12f but brute force gives %.12f", c.name,
               coco, brute_coco));
    expect(o, std::abs(all_point - brute_all) <= 1e-9,
           fmt("%s: all-point AP %.12f but brute force gives %.12f", c.name,
               all_point, brute_all));
  }

  // The worked example has a closed form: 34 recall samples at precision 1
  // and 67 below two-thirds recall... precisely 56/101.
  {
    std::vector<RankedDetection> ranked = {
        {0.9, true}, {0.8, false}, {0.7, true}};
    const double ap = average_precision(detection_pr(ranked, 3));
    expect(o, std::abs(ap - 56.0 / 101.0) <= 1e-9,
           fmt("worked example AP %.12f != 56/101", ap));
  }

  o.seconds = timer.seconds();
  o.stats = fmt("%zu hand-scripted rankings (<=10 detections) match "
                "brute-force 101-point and all-point AP to 1e-9; worked "
                "example equals 56/101",
                cases.size());
  return o;
}

// --- criterion 5: golden files and documented rejections ------------------

Outcome golden_files_round_trip() {
  Outcome o;
  Stopwatch timer;
  const fs::path data(FLOCKEVAL_TEST_DATA);
  const fs::path golden = data / "golden";

  const std::string csv_bytes = read_file(golden / "pen281.csv");
  expect(o, serialize_ethogram_csv(parse_ethogram_csv(csv_bytes)) ==
                csv_bytes,
         "ethogram CSV did not round-trip byte for byte");

  for (const char* name : {"pen281_000000.json", "pen281_000001.json"}) {
    const std::string bytes =
        read_file(golden / "polygons" / "pen281" / name);
    expect(o, serialize_polygon_json(parse_polygon_json(bytes)) == bytes,
           fmt("%s did not round-trip byte for byte", name));
  }

  const std::string manifest_bytes = read_file(golden / "manifest.json");
  expect(o, serialize_manifest(parse_manifest(manifest_bytes)) ==
                manifest_bytes,
         "manifest did not round-trip byte for byte");

  const std::string pred_bytes =
      read_file(data / "golden_predictions.ndjson");
  expect(o, serialize_predictions(parse_predictions(pred_bytes)) ==
                pred_bytes,
         "predictions NDJSON did not round-trip byte for byte");

  const LoadedDataset dataset = load_dataset(golden / "manifest.json");
  expect(o, dataset.report.clean(), "golden dataset reported violations");
  expect(o, dataset.frames.size() == 2,
         "golden dataset merged to the wrong frame count");

  // A count cell that disagrees with the set flags is rejected as CountRule.
  const std::vector<EthogramRow> bad_rows =
      parse_ethogram_csv(read_file(data / "bad_count.csv"));
  const ValidationReport bad_count = validate_rows(bad_rows);
  bool saw_count_rule = false;
  for (const Violation& v : bad_count.entries) {
    if (v.code == ViolationCode::CountRule) saw_count_rule = true;
  }
  expect(o, saw_count_rule,
         "count=3 row was not rejected with the CountRule code");

  // A seven-point outline is rejected as WrongPointCount and excluded.
  const std::vector<RawShape> bad_shapes =
      parse_polygon_json(read_file(data / "bad_polygon.json"));
  expect(o, bad_shapes.size() == 1 && bad_shapes[0].points.size() == 7,
         "bad polygon fixture lost its seven points in parsing");
  const std::vector<PolygonAnomaly> anomalies =
      validate_polygon(bad_shapes[0].points, 1280.0, 720.0);
  expect(o,
         anomalies == std::vector<PolygonAnomaly>{
                          PolygonAnomaly::WrongPointCount},
         "seven-point polygon was not flagged as WrongPointCount");
  expect(o, excludes_from_matching(PolygonAnomaly::WrongPointCount),
         "WrongPointCount does not exclude a polygon from matching");

  PolygonFrame bad_frame;
  bad_frame.video_id = "pen281";
  bad_frame.frame_index = 0;
  bad_frame.shapes = bad_shapes;
  EthogramRow row;
  row.date = "2020-05-12";
  row.image = "pen281_000000";
  row.time = "06:00:00";
  row.bird_id = bad_shapes[0].bird_id;
  row.flags[0] = 1;
  row.count = 1;
  const VideoRows rows{"pen281", {row}};
  const DatasetManifest manifest = parse_manifest(manifest_bytes);
  const PolygonFrame frames_in[] = {bad_frame};
  const VideoRows rows_in[] = {rows};
  const MergeResult merged =
      merge_annotations({frames_in, 1}, {rows_in, 1}, manifest);
  bool flagged = false;
  for (const Violation& v : merged.report.entries) {
    if (v.code == ViolationCode::PolygonAnomaly &&
        v.anomaly == PolygonAnomaly::WrongPointCount) {
      flagged = true;
    }
  }
  expect(o, flagged,
         "merged dataset did not report the seven-point polygon");
  expect(o,
         merged.frames.size() == 1 && merged.frames[0].birds.size() == 1 &&
             !merged.frames[0].birds[0].matchable(),
         "seven-point polygon still counts as matchable ground truth");

  o.seconds = timer.seconds();
  o.stats = "CSV, polygon JSON, manifest, and predictions round-trip byte "
            "for byte; count=3 rejected as CountRule; 7-point outline "
            "rejected as WrongPointCount and unmatchable";
  return o;
}

// --- criterion 6: video-level folds ---------------------------------------

Outcome folds_partition_videos() {
  Outcome o;
  Stopwatch timer;

  DatasetManifest manifest;
  manifest.camera_id = 1;
  manifest.frame_width = 1280.0;
  manifest.frame_height = 720.0;
  for (int v = 281; v <= 290; ++v) {
    const std::string id = std::to_string(v);
    manifest.videos.push_back({id, "polygons/" + id, id + ".csv"});
  }
  const FoldSpec spec = make_folds(manifest, 5, std::nullopt);
  const std::vector<std::vector<std::string>> expected = {
      {"281", "282"}, {"283", "284"}, {"285", "286"},
      {"287", "288"}, {"289", "290"}};
  bool blocks_ok = spec.folds.size() == expected.size();
  for (std::size_t f = 0; blocks_ok && f < expected.size(); ++f) {
    blocks_ok = spec.folds[f].test_videos == expected[f];
  }
  expect(o, blocks_ok,
         "videos 281-290 at k=5 did not split into the five contiguous "
         "pairs");

  oracles::TestRng rng(60222);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform(0.0, 40.0));
    DatasetManifest random_manifest;
    random_manifest.camera_id = 1 + trial % 3;
    random_manifest.frame_width = 1280.0;
    random_manifest.frame_height = 720.0;
    std::vector<std::string> ids;
    for (int v = 0; v < n; ++v) {
      ids.push_back("vid" + std::to_string(trial) + "_" + std::to_string(v));
      random_manifest.videos.push_back(
          {ids.back(), "polygons/" + ids.back(), ids.back() + ".csv"});
    }
    const int k = 2 + static_cast<int>(rng.uniform(0.0, n - 1.0));
    std::optional<std::uint64_t> seed;
    if (rng.uniform() < 0.5) seed = rng.bits();
    const FoldSpec folds = make_folds(random_manifest, k, seed);

    std::set<std::string> all(ids.begin(), ids.end());
    std::set<std::string> seen;
    std::size_t min_size = ids.size(), max_size = 0;
    bool ok = folds.folds.size() == static_cast<std::size_t>(k);
    for (const Fold& fold : folds.folds) {
      min_size = std::min(min_size, fold.test_videos.size());
      max_size = std::max(max_size, fold.test_videos.size());
      for (const std::string& id : fold.test_videos) {
        ok = ok && all.count(id) == 1 && seen.insert(id).second;
      }
      std::set<std::string> test(fold.test_videos.begin(),
                                 fold.test_videos.end());
      ok = ok && fold.train_videos.size() + test.size() == ids.size();
      for (const std::string& id : fold.train_videos) {
        ok = ok && test.count(id) == 0;
      }
    }
    ok = ok && seen.size() == ids.size() && max_size - min_size <= 1;
    if (ok) {
      ++checked;
    } else {
      expect(o, false,
             fmt("trial %d (n=%d, k=%d%s) broke the fold invariants", trial,
                 n, k, seed ? ", seeded" : ""));
    }
  }
  expect(o, checked == 1000, "not all random manifests were validated");

  o.seconds = timer.seconds();
  o.stats = fmt("videos 281-290 at k=5 give the five contiguous pairs; "
                "%d random manifests: test sets partition the videos, train "
                "sets are exact complements, sizes differ by at most one",
                checked);
  return o;
}

// --- criterion 7: class imbalance in the F1 summaries ---------------------

Outcome imbalance_shows_in_f1_summaries() {
  Outcome o;
  Stopwatch timer;

  const std::vector<std::string> classes = {"CTR", "EAT", "FOR", "PRA",
                                            "PRE"};
  // Row-major confusion counts for supports (900, 900, 30, 10, 60): the
  // majority classes are nearly clean while the rare classes scatter.
  const std::vector<std::vector<std::int64_t>> counts = {
      {900, 0, 0, 0, 0},
      {0, 880, 5, 5, 10},
      {0, 10, 12, 3, 5},
      {0, 4, 3, 1, 2},
      {0, 20, 6, 4, 30},
  };
  std::vector<std::string> gt, pred;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t j = 0; j < classes.size(); ++j) {
      for (std::int64_t n = 0; n < counts[i][j]; ++n) {
        gt.push_back(classes[i]);
        pred.push_back(classes[j]);
      }
    }
  }

  const ConfusionMatrix cm = confusion(gt, pred, classes);
  const ClassificationReport report = classification_report(cm);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    expect(o, cm.row_sum(i) == (i < 2 ? 900 : counts[i][0] + counts[i][1] +
                                                   counts[i][2] +
                                                   counts[i][3] +
                                                   counts[i][4]),
           "confusion supports drifted from the construction");
  }
  expect(o, report.supports == std::vector<std::int64_t>{900, 900, 30, 10, 60},
         "supports are not (900, 900, 30, 10, 60)");
  expect(o, report.weighted_f1 > report.macro_f1 + 0.05,
         fmt("weighted F1 %.4f does not exceed macro F1 %.4f on the "
             "imbalanced matrix",
             report.weighted_f1, report.macro_f1));

  const oracles::RefClassification ref =
      oracles::ref_classification(gt, pred, classes);
  expect(o, std::abs(report.macro_f1 - ref.macro_f1) <= 1e-12 &&
                std::abs(report.weighted_f1 - ref.weighted_f1) <= 1e-12 &&
                std::abs(report.accuracy - ref.accuracy) <= 1e-12,
         "summary metrics disagree with longhand computation");

  // Tripling the majority class must leave macro F1 untouched: CTR's row
  // and column are pure, so its precision and recall stay exactly 1.
  std::vector<std::string> gt_grown = gt, pred_grown = pred;
  for (int n = 0; n < 1800; ++n) {
    gt_grown.push_back("CTR");
    pred_grown.push_back("CTR");
  }
  const ClassificationReport grown =
      classification_report(confusion(gt_grown, pred_grown, classes));
  expect(o, std::abs(grown.macro_f1 - report.macro_f1) <= 1e-12,
         fmt("macro F1 moved by %.3e when the majority class tripled",
             std::abs(grown.macro_f1 - report.macro_f1)));
  expect(o, grown.weighted_f1 > report.weighted_f1,
         "weighted F1 did not move toward the replicated majority class");

  o.seconds = timer.seconds();
  o.stats = fmt("supports (900,900,30,10,60): weighted F1 %.4f > macro F1 "
                "%.4f; tripling the majority class shifts macro by < 1e-12",
                report.weighted_f1, report.macro_f1);
  return o;
}

// --- criterion 8: CLI determinism ------------------------------------------

int run_cli(const std::string& args) {
  const std::string command =
      std::string("\"") + FLOCKEVAL_CLI_PATH + "\" " + args +
      " >/dev/null 2>/dev/null";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    files[fs::relative(entry.path(), dir).string()] =
        read_file(entry.path());
  }
  return files;
}

Outcome cli_runs_are_byte_identical() {
  Outcome o;
  Stopwatch timer;
  const fs::path root = oracles::temp_dir("acceptance_cli");

  // One synthetic dataset feeds every subcommand.
  const fs::path scene = root / "scene";
  const std::string gen_flags =
      "generate --seed 77 --birds 10 --frames 12 --videos 2 --prefix acc "
      "--jitter 2 --drop 0.1 --fp 0.5 --out ";
  expect(o, run_cli(gen_flags + "\"" + (root / "gen1").string() + "\"") == 0,
         "generate (first run) failed");
  expect(o, run_cli(gen_flags + "\"" + (root / "gen2").string() + "\"") == 0,
         "generate (second run) failed");
  expect(o, snapshot(root / "gen1") == snapshot(root / "gen2"),
         "generate wrote different bytes on the second run");
  fs::rename(root / "gen1", scene);

  const std::string manifest = (scene / "manifest.json").string();
  const std::string preds = (scene / "predictions.ndjson").string();

  struct Command {
    const char* name;
    std::string args;  // with OUT as the output placeholder
    bool out_is_dir;
  };
  const std::vector<Command> commands = {
      {"validate",
       "validate --manifest \"" + manifest + "\" --out OUT", false},
      {"split",
       "split --manifest \"" + manifest + "\" --k 2 --seed 9 --out OUT",
       false},
      {"match",
       "match --manifest \"" + manifest + "\" --pred \"" + preds +
           "\" --alpha 0.3 --alpha 0.75 --threads 0 --out OUT",
       false},
      {"evaluate",
       "evaluate --manifest \"" + manifest + "\" --pred \"" + preds +
           "\" --threads 0 --out OUT",
       true},
      {"welfare",
       "welfare --manifest \"" + manifest +
           "\" --window 4 --rule \"EAT<0.3:2\" --out OUT",
       true},
  };

  std::vector<std::string> verified;
  for (const Command& command : commands) {
    std::array<std::map<std::string, std::string>, 2> outputs;
    bool ran = true;
    for (int round = 0; round < 2; ++round) {
      const fs::path out =
          root / (std::string(command.name) + std::to_string(round));
      if (command.out_is_dir) fs::create_directories(out);
      std::string args = command.args;
      args.replace(args.find("OUT"), 3, "\"" + out.string() + "\"");
      if (run_cli(args) != 0) {
        expect(o, false,
               fmt("%s exited nonzero on round %d", command.name, round));
        ran = false;
        break;
      }
      outputs[round] = command.out_is_dir
                           ? snapshot(out)
                           : std::map<std::string, std::string>{
                                 {"out", read_file(out)}};
    }
    if (!ran) continue;
    if (outputs[0] == outputs[1] && !outputs[0].empty()) {
      verified.push_back(command.name);
    } else {
      expect(o, false,
             fmt("%s wrote different bytes on identical reruns",
                 command.name));
    }
  }

  // Threading must not leak into the output bytes either.
  const fs::path t1 = root / "threads1", t0 = root / "threads0";
  fs::create_directories(t1);
  fs::create_directories(t0);
  expect(o,
         run_cli("evaluate --manifest \"" + manifest + "\" --pred \"" +
                 preds + "\" --threads 1 --out \"" + t1.string() + "\"") == 0,
         "single-threaded evaluate failed");
  expect(o,
         run_cli("evaluate --manifest \"" + manifest + "\" --pred \"" +
                 preds + "\" --threads 0 --out \"" + t0.string() + "\"") == 0,
         "parallel evaluate failed");
  expect(o, snapshot(t1) == snapshot(t0),
         "evaluate bytes depend on the thread count");

  o.seconds = timer.seconds();
  std::string names;
  for (const std::string& name : verified) {
    if (!names.empty()) names += ", ";
    names += name;
  }
  o.stats = fmt("generate, %s re-run byte-identical; evaluate bytes equal "
                "at --threads 1 and --threads 0",
                names.c_str());
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria = {
      {"polygon and box IoU agree with sampling oracles",
       polygon_and_bbox_iou_accuracy},
      {"greedy matching invariants on random frames",
       matching_invariants_hold_on_random_frames},
      {"pipeline metrics equal the corruption-ledger replay",
       metrics_equal_ledger_replay},
      {"ranked AP equals brute-force interpolation",
       ranked_ap_matches_brute_force},
      {"golden files round-trip and bad records are rejected",
       golden_files_round_trip},
      {"folds split whole videos without leakage", folds_partition_videos},
      {"imbalanced classes separate weighted and macro F1",
       imbalance_shows_in_f1_summaries},
      {"CLI reruns are byte-identical", cli_runs_are_byte_identical},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Outcome outcome = criteria[i].run();
    std::printf("[%s] criterion %zu: %s: %s (%.2fs)\n",
                outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].label,
                outcome.stats.c_str(), outcome.seconds);
    for (const std::string& problem : outcome.problems) {
      std::printf("       - %s\n", problem.c_str());
    }
    if (!outcome.pass) ++failures;
  }
  std::printf("%zu/%zu acceptance criteria passed\n",
              criteria.size() - static_cast<std::size_t>(failures),
              criteria.size());
  return failures == 0 ? 0 : 1;
}
