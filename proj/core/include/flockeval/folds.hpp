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
#ifndef FLOCKEVAL_FOLDS_HPP_
#define FLOCKEVAL_FOLDS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flockeval/schema.hpp"

namespace flockeval {

struct Fold {
  std::vector<std::string> test_videos;
  std::vector<std::string> train_videos;

  friend bool operator==(const Fold&, const Fold&) = default;
};

// A cross-validation split over whole videos. Test sets partition the
// video list; every train set is its complement, so no video leaks.
struct FoldSpec {
  int camera_id = 0;
  int k = 0;
  std::vector<Fold> folds;

  friend bool operator==(const FoldSpec&, const FoldSpec&) = default;
};

// Splits the manifest's videos into k folds. Without a seed, folds are
// contiguous blocks in manifest order (the first |videos| mod k folds get
// the extra video). With a seed, the video list is shuffled first; the
// same seed always yields the same folds. Videos are never split across
// folds, so adjacent frames of one clip stay on one side.
FoldSpec make_folds(const DatasetManifest& manifest, int k,
                    std::optional<std::uint64_t> seed = std::nullopt);

std::string serialize_foldspec(const FoldSpec& spec);
FoldSpec parse_foldspec(std::string_view bytes);

}  // namespace flockeval

#endif  // FLOCKEVAL_FOLDS_HPP_
