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
#include "flockeval/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "flockeval/errors.hpp"
#include "json.hpp"

namespace flockeval {

namespace {

void finalize(BehaviorBudget& b) {
  for (std::size_t i = 0; i < b.behavior_counts.size(); ++i) {
    b.behavior_fractions[i] =
        b.behavior_support > 0
            ? static_cast<double>(b.behavior_counts[i]) /
                  static_cast<double>(b.behavior_support)
            : 0.0;
  }
  for (std::size_t i = 0; i < b.posture_counts.size(); ++i) {
    b.posture_fractions[i] =
        b.posture_support > 0
            ? static_cast<double>(b.posture_counts[i]) /
                  static_cast<double>(b.posture_support)
            : 0.0;
  }
  b.visible_count_mean =
      b.frame_count > 0 ? static_cast<double>(b.visible_total) /
                              static_cast<double>(b.frame_count)
                        : 0.0;
}

BehaviorBudget accumulate(std::span<const FrameAnnotation> frames,
                          Window window) {
  BehaviorBudget budget;
  budget.window = window;
  for (const FrameAnnotation& frame : frames) {
    if (frame.frame_index < window.start_frame ||
        frame.frame_index >= window.end_frame) {
      continue;
    }
    ++budget.frame_count;
    for (const BirdAnnotation& bird : frame.birds) {
      if (!bird.visible) continue;
      ++budget.visible_total;
      if (const std::optional<Behavior> b = effective_behavior(bird)) {
        ++budget.behavior_counts[static_cast<std::size_t>(*b)];
        ++budget.behavior_support;
      }
      if (bird.posture) {
        ++budget.posture_counts[static_cast<std::size_t>(
            binarize(*bird.posture))];
        ++budget.posture_support;
      }
    }
  }
  finalize(budget);
  return budget;
}

std::string format_ratio(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

}  // namespace

BehaviorBudget behavior_budget(std::span<const FrameAnnotation> frames,
                               Window window) {
  BehaviorBudget budget = accumulate(frames, window);
  if (budget.frame_count == 0) {
    throw EmptyInput("no frames in window [" +
                     std::to_string(window.start_frame) + ", " +
                     std::to_string(window.end_frame) + ")");
  }
  return budget;
}

BehaviorBudget merge_budgets(std::span<const BehaviorBudget> budgets) {
  if (budgets.empty()) throw EmptyInput("no budgets to merge");
  BehaviorBudget merged;
  merged.window.start_frame = std::numeric_limits<std::int64_t>::max();
  merged.window.end_frame = std::numeric_limits<std::int64_t>::min();
  for (const BehaviorBudget& b : budgets) {
    merged.window.start_frame =
        std::min(merged.window.start_frame, b.window.start_frame);
    merged.window.end_frame =
        std::max(merged.window.end_frame, b.window.end_frame);
    for (std::size_t i = 0; i < merged.behavior_counts.size(); ++i) {
      merged.behavior_counts[i] += b.behavior_counts[i];
    }
    for (std::size_t i = 0; i < merged.posture_counts.size(); ++i) {
      merged.posture_counts[i] += b.posture_counts[i];
    }
    merged.behavior_support += b.behavior_support;
    merged.posture_support += b.posture_support;
    merged.visible_total += b.visible_total;
    merged.frame_count += b.frame_count;
  }
  finalize(merged);
  return merged;
}

std::vector<BehaviorBudget> sliding_budgets(
    std::span<const FrameAnnotation> frames, std::int64_t window_length) {
  if (window_length <= 0) {
    throw EmptyInput("window length must be positive");
  }
  if (frames.empty()) throw EmptyInput("no frames");
  std::int64_t lo = frames.front().frame_index;
  std::int64_t hi = lo;
  for (const FrameAnnotation& f : frames) {
    lo = std::min(lo, f.frame_index);
    hi = std::max(hi, f.frame_index);
  }
  std::vector<BehaviorBudget> budgets;
  for (std::int64_t start = lo; start <= hi; start += window_length) {
    budgets.push_back(
        accumulate(frames, Window{start, start + window_length}));
  }
  return budgets;
}

std::vector<WelfareFlag> evaluate_rules(
    std::span<const BehaviorBudget> budgets,
    std::span<const WelfareRule> rules) {
  std::vector<WelfareFlag> flags;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    const WelfareRule& rule = rules[r];
    const std::size_t behavior = static_cast<std::size_t>(rule.behavior);
    const std::int64_t need = std::max<std::int64_t>(rule.min_window, 1);

    std::size_t run_start = 0;
    std::size_t i = 0;
    while (i <= budgets.size()) {
      const bool holds =
          i < budgets.size() &&
          (rule.comparator == Comparator::Below
               ? budgets[i].behavior_fractions[behavior] < rule.threshold
               : budgets[i].behavior_fractions[behavior] > rule.threshold);
      if (holds) {
        ++i;
        continue;
      }
      if (static_cast<std::int64_t>(i - run_start) >= need) {
        for (std::size_t w = run_start; w < i; ++w) {
          flags.push_back(WelfareFlag{
              r, budgets[w].window,
              budgets[w].behavior_fractions[behavior]});
        }
      }
      ++i;
      run_start = i;
    }
  }
  return flags;
}

std::string serialize_budgets_csv(std::span<const BehaviorBudget> budgets) {
  std::string out =
      "window_start,window_end,frames,visible_mean,behavior_support";
  for (Behavior b : kAllBehaviors) {
    out += ',';
    out += code_of(b);
  }
  out += ",posture_support,STA,WLK\n";
  for (const BehaviorBudget& b : budgets) {
    out += std::to_string(b.window.start_frame);
    out += ',';
    out += std::to_string(b.window.end_frame);
    out += ',';
    out += std::to_string(b.frame_count);
    out += ',';
    out += format_ratio(b.visible_count_mean);
    out += ',';
    out += std::to_string(b.behavior_support);
    for (double f : b.behavior_fractions) {
      out += ',';
      out += format_ratio(f);
    }
    out += ',';
    out += std::to_string(b.posture_support);
    for (double f : b.posture_fractions) {
      out += ',';
      out += format_ratio(f);
    }
    out += '\n';
  }
  return out;
}

std::string serialize_flags_json(std::span<const WelfareFlag> flags,
                                 std::span<const WelfareRule> rules) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json rule_list = nlohmann::ordered_json::array();
  for (const WelfareRule& rule : rules) {
    nlohmann::ordered_json r;
    r["behavior"] = std::string(code_of(rule.behavior));
    r["comparator"] =
        rule.comparator == Comparator::Below ? "below" : "above";
    r["threshold"] = rule.threshold;
    r["min_window"] = rule.min_window;
    if (!rule.name.empty()) r["name"] = rule.name;
    rule_list.push_back(std::move(r));
  }
  doc["rules"] = std::move(rule_list);
  nlohmann::ordered_json flag_list = nlohmann::ordered_json::array();
  for (const WelfareFlag& flag : flags) {
    nlohmann::ordered_json f;
    f["rule"] = flag.rule_index;
    f["window_start"] = flag.window.start_frame;
    f["window_end"] = flag.window.end_frame;
    f["observed"] = std::round(flag.observed * 10000.0) / 10000.0;
    flag_list.push_back(std::move(f));
  }
  doc["flags"] = std::move(flag_list);
  return doc.dump(2) + "\n";
}

}  // namespace flockeval
