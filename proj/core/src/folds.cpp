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
#include "flockeval/folds.hpp"

#include <algorithm>
#include <numeric>

#include "flockeval/errors.hpp"
#include "flockeval/rng.hpp"
#include "json.hpp"

namespace flockeval {

FoldSpec make_folds(const DatasetManifest& manifest, int k,
                    std::optional<std::uint64_t> seed) {
  const std::vector<std::string> videos = manifest.video_ids();
  const std::size_t n = videos.size();
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw InvalidFoldCount("fold count " + std::to_string(k) +
                           " is not in [2, " + std::to_string(n) + "]");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (seed) {
    Rng rng(*seed);
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
  }

  FoldSpec spec;
  spec.camera_id = manifest.camera_id;
  spec.k = k;
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t cursor = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size =
        base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    std::vector<std::size_t> test(order.begin() + cursor,
                                  order.begin() + cursor + size);
    cursor += size;
    std::sort(test.begin(), test.end());  // manifest order inside each fold

    Fold fold;
    std::vector<char> in_test(n, 0);
    for (std::size_t idx : test) {
      in_test[idx] = 1;
      fold.test_videos.push_back(videos[idx]);
    }
    for (std::size_t idx = 0; idx < n; ++idx) {
      if (!in_test[idx]) fold.train_videos.push_back(videos[idx]);
    }
    spec.folds.push_back(std::move(fold));
  }
  return spec;
}

std::string serialize_foldspec(const FoldSpec& spec) {
  nlohmann::ordered_json doc;
  doc["camera_id"] = spec.camera_id;
  doc["k"] = spec.k;
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  for (const Fold& fold : spec.folds) {
    nlohmann::ordered_json f;
    f["test"] = fold.test_videos;
    f["train"] = fold.train_videos;
    folds.push_back(std::move(f));
  }
  doc["folds"] = std::move(folds);
  return doc.dump(2) + "\n";
}

FoldSpec parse_foldspec(std::string_view bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("folds") || !doc["folds"].is_array()) {
    throw SchemaError("fold file must carry a 'folds' array");
  }
  FoldSpec spec;
  spec.camera_id = doc.value("camera_id", 0);
  spec.k = doc.value("k", 0);
  for (const auto& f : doc["folds"]) {
    if (!f.contains("test") || !f.contains("train")) {
      throw SchemaError("each fold needs 'test' and 'train' video lists");
    }
    Fold fold;
    fold.test_videos = f["test"].get<std::vector<std::string>>();
    fold.train_videos = f["train"].get<std::vector<std::string>>();
    spec.folds.push_back(std::move(fold));
  }
  if (spec.k == 0) spec.k = static_cast<int>(spec.folds.size());
  if (spec.folds.empty() ||
      spec.folds.size() != static_cast<std::size_t>(spec.k)) {
    throw SchemaError("fold count does not match the 'folds' array");
  }
  return spec;
}

}  // namespace flockeval
