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
#ifndef FLOCKEVAL_WELFARE_HPP_
#define FLOCKEVAL_WELFARE_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flockeval/schema.hpp"

namespace flockeval {

// Frame-index window, half-open: start <= frame < end.
struct Window {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;

  friend bool operator==(const Window&, const Window&) = default;
};

// Group-level time budget over one window. Fractions are over visible
// bird-frames that carry the respective label, so not-visible birds never
// dilute them; integer counts are kept so windows recombine exactly.
struct BehaviorBudget {
  Window window;
  std::array<std::int64_t, 7> behavior_counts{};  // kAllBehaviors order
  std::array<std::int64_t, 2> posture_counts{};   // Stationary, Walking
  std::array<double, 7> behavior_fractions{};
  std::array<double, 2> posture_fractions{};
  std::int64_t behavior_support = 0;
  std::int64_t posture_support = 0;
  std::int64_t visible_total = 0;  // visible bird-frames
  std::int64_t frame_count = 0;
  double visible_count_mean = 0.0;
};

// Budget over the frames whose index falls in the window. Throws
// EmptyInput when no frame does.
BehaviorBudget behavior_budget(std::span<const FrameAnnotation> frames,
                               Window window);

// Support-weighted recombination; over a partition of windows this equals
// the whole-range budget exactly.
BehaviorBudget merge_budgets(std::span<const BehaviorBudget> budgets);

// Uniform windows of window_length frames covering the data's index range,
// last window possibly padded past the end. Windows with no frames stay in
// the series with zero support.
std::vector<BehaviorBudget> sliding_budgets(
    std::span<const FrameAnnotation> frames, std::int64_t window_length);

enum class Comparator { Below, Above };

struct WelfareRule {
  Behavior behavior = Behavior::Eating;
  Comparator comparator = Comparator::Below;
  double threshold = 0.0;       // fraction in [0, 1]
  std::int64_t min_window = 1;  // consecutive windows required to flag
  std::string name;             // optional label carried into reports
};

struct WelfareFlag {
  std::size_t rule_index = 0;
  Window window;
  double observed = 0.0;

  friend bool operator==(const WelfareFlag&, const WelfareFlag&) = default;
};

// Flags every window that sits inside a run of at least min_window
// consecutive windows where the rule's comparison holds (strict < or >).
// Flags come out ordered by rule, then window.
std::vector<WelfareFlag> evaluate_rules(
    std::span<const BehaviorBudget> budgets,
    std::span<const WelfareRule> rules);

std::string serialize_budgets_csv(std::span<const BehaviorBudget> budgets);
std::string serialize_flags_json(std::span<const WelfareFlag> flags,
                                 std::span<const WelfareRule> rules);

}  // namespace flockeval

#endif  // FLOCKEVAL_WELFARE_HPP_
