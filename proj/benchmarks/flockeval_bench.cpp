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
// Micro benchmarks for the hot paths: overlap geometry, per-frame matching,
// and the ranked evaluation pipeline.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "flockeval/geometry.hpp"
#include "flockeval/matching.hpp"
#include "flockeval/metrics.hpp"
#include "flockeval/rng.hpp"
#include "flockeval/synthetic.hpp"

namespace {

using namespace flockeval;

void bm_bbox_iou(benchmark::State& state) {
  const BBox a{100.0, 100.0, 180.0, 160.0};
  const BBox b{140.0, 120.0, 220.0, 190.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(bbox_iou(a, b));
  }
}
BENCHMARK(bm_bbox_iou);

void bm_convex_polygon_iou(benchmark::State& state) {
  // Zero radial noise keeps the blobs elliptical, so the clipping fast
  // path applies.
  const Polygon8 a = sample_blob(200.0, 200.0, 40.0, 25.0, 0.3, 0.0, 1);
  const Polygon8 b = sample_blob(215.0, 210.0, 38.0, 24.0, 1.1, 0.0, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(polygon_iou(a, b));
  }
}
BENCHMARK(bm_convex_polygon_iou);

void bm_raster_polygon_iou(benchmark::State& state) {
  const int resolution = static_cast<int>(state.range(0));
  const Polygon8 a = sample_blob(200.0, 200.0, 40.0, 25.0, 0.3, 0.3, 1);
  const Polygon8 b = sample_blob(215.0, 210.0, 38.0, 24.0, 1.1, 0.3, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterized_polygon_iou(a, b, resolution));
  }
}
BENCHMARK(bm_raster_polygon_iou)->Arg(2)->Arg(4)->Arg(8);

void bm_match_frame(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(17);
  std::vector<GtGeometry> gt;
  std::vector<Prediction> preds;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(0.0, 1200.0);
    const double y = rng.uniform(0.0, 640.0);
    gt.push_back(GtGeometry{BBox{x, y, x + 60.0, y + 40.0}, std::nullopt});
    Prediction pred;
    pred.video_id = "bench";
    pred.frame_index = 0;
    pred.bbox = BBox{x + rng.uniform(-8.0, 8.0), y + rng.uniform(-8.0, 8.0),
                     x + 60.0 + rng.uniform(-8.0, 8.0),
                     y + 40.0 + rng.uniform(-8.0, 8.0)};
    pred.label = "EAT";
    pred.score = rng.uniform();
    preds.push_back(std::move(pred));
  }
  const MatchConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(match_frame(gt, preds, cfg));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_match_frame)->Arg(8)->Arg(32)->Arg(128)->Complexity();

void bm_ranked_ap(benchmark::State& state) {
  const std::size_t n = 10000;
  Rng rng(29);
  std::vector<RankedDetection> ranked;
  for (std::size_t i = 0; i < n; ++i) {
    ranked.push_back(RankedDetection{1.0 - static_cast<double>(i) / n,
                                     rng.uniform() < 0.6});
  }
  for (auto _ : state) {
    const PRCurve curve = detection_pr(ranked, 8000);
    benchmark::DoNotOptimize(average_precision(curve));
  }
}
BENCHMARK(bm_ranked_ap);

void bm_coco_evaluate(benchmark::State& state) {
  SceneConfig cfg;
  cfg.bird_count = 20;
  cfg.frame_count = 20;
  const SyntheticScene scene = generate_scene(cfg, 5);
  NoiseConfig noise;
  noise.jitter_sigma = 2.0;
  noise.drop_rate = 0.1;
  noise.false_positive_rate = 0.5;
  const CorruptionResult out = corrupt(scene, noise, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(coco_evaluate(scene.frames, out.predictions,
                                           IouMode::BBox, {},
                                           kDefaultIouResolution, 1));
  }
}
BENCHMARK(bm_coco_evaluate);

}  // namespace

BENCHMARK_MAIN();
