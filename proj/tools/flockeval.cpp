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
// Command-line driver: validate, split, match, evaluate, generate, welfare.
//
// Exit codes:
//   0  success
//   1  validation violations found (validate only)
//   2  data or format error (parse, schema, merge, geometry, generation)
//   3  I/O error (unreadable or unwritable path)
//   4  usage error (bad flags, bad config file keys, bad rule syntax)
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flockeval/errors.hpp"
#include "flockeval/folds.hpp"
#include "flockeval/matching.hpp"
#include "flockeval/report.hpp"
#include "flockeval/schema.hpp"
#include "flockeval/synthetic.hpp"
#include "flockeval/welfare.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitData = 2;
constexpr int kExitIo = 3;
constexpr int kExitUsage = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Loads --config (a flat JSON object of flag values) and appends one CLI
// argument per key that was not already given on the command line, so
// explicit flags always win. Arrays repeat the flag per element.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;

  ordered_json doc;
  try {
    doc = ordered_json::parse(flockeval::read_file(config_path));
  } catch (const ordered_json::parse_error& err) {
    throw flockeval::ParseError("config " + config_path + ": " + err.what(),
                                err.byte);
  }
  if (!doc.is_object()) {
    throw UsageError("config " + config_path + " must be a JSON object");
  }

  const auto given = [&args](const std::string& flag) {
    for (const std::string& arg : args) {
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  const auto scalar = [](const ordered_json& value) -> std::string {
    if (value.is_string()) return value.get<std::string>();
    return value.dump();
  };

  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (key == "config" || given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& element : value) {
        args.push_back(flag);
        args.push_back(scalar(element));
      }
    } else {
      args.push_back(flag);
      args.push_back(scalar(value));
    }
  }
  return args;
}

void emit(const std::string& out_path, const std::string& bytes) {
  if (out_path.empty()) {
    std::fwrite(bytes.data(), 1, bytes.size(), stdout);
  } else {
    flockeval::write_file(out_path, bytes);
  }
}

// Timestamps are opt-in so report bytes stay a pure function of the inputs.
void write_stamp(const std::string& out_path, bool directory) {
  char buf[32];
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  const std::string line = std::string(buf) + "\n";
  if (out_path.empty()) {
    std::fputs(line.c_str(), stderr);
  } else if (directory) {
    flockeval::write_file(fs::path(out_path) / "stamp.txt", line);
  } else {
    flockeval::write_file(out_path + ".stamp", line);
  }
}

flockeval::IouMode mode_from_string(const std::string& mode) {
  if (mode == "bbox") return flockeval::IouMode::BBox;
  if (mode == "segm") return flockeval::IouMode::Polygon;
  throw UsageError("unknown mode '" + mode + "', expected bbox or segm");
}

// Rule syntax: CODE<THRESHOLD or CODE>THRESHOLD, optionally :MIN_WINDOWS,
// e.g. EAT<0.10 or FOR>0.25:3.
flockeval::WelfareRule parse_rule(const std::string& text) {
  const std::size_t op = text.find_first_of("<>");
  if (op == std::string::npos || op == 0) {
    throw UsageError("rule '" + text + "' must look like CODE<0.1[:N]");
  }
  flockeval::WelfareRule rule;
  rule.name = text;
  const std::optional<flockeval::Behavior> behavior =
      flockeval::behavior_from_code(text.substr(0, op));
  if (!behavior) {
    throw UsageError("rule '" + text + "' names an unknown behavior code");
  }
  rule.behavior = *behavior;
  rule.comparator = text[op] == '<' ? flockeval::Comparator::Below
                                    : flockeval::Comparator::Above;
  std::string rest = text.substr(op + 1);
  const std::size_t colon = rest.find(':');
  if (colon != std::string::npos) {
    try {
      rule.min_window = std::stoll(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw UsageError("rule '" + text + "' has a bad window count");
    }
    if (rule.min_window < 1) {
      throw UsageError("rule '" + text + "' needs a window count >= 1");
    }
    rest = rest.substr(0, colon);
  }
  try {
    rule.threshold = std::stod(rest);
  } catch (const std::exception&) {
    throw UsageError("rule '" + text + "' has a bad threshold");
  }
  if (rule.threshold < 0.0 || rule.threshold > 1.0) {
    throw UsageError("rule '" + text + "' threshold must be in [0, 1]");
  }
  return rule;
}

struct CommonArgs {
  std::string manifest;
  std::string out;
  std::string config;  // consumed by expand_config, registered to parse
  bool stamp = false;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool manifest_required) {
  CLI::Option* manifest = cmd->add_option(
      "--manifest", args->manifest, "Dataset manifest JSON path");
  if (manifest_required) manifest->required();
  cmd->add_option("--out", args->out, "Output file or directory");
  cmd->add_option("--config", args->config,
                  "JSON file of flag defaults; explicit flags override");
  cmd->add_flag("--stamp", args->stamp,
                "Also record the wall-clock time of the run");
}

int run_validate(const CommonArgs& common) {
  const flockeval::LoadedDataset dataset =
      flockeval::load_dataset(common.manifest);
  emit(common.out, flockeval::serialize_validation_report(dataset.report));
  if (common.stamp) write_stamp(common.out, false);
  return dataset.report.clean() ? kExitOk : kExitViolations;
}

int run_split(const CommonArgs& common, int k, std::int64_t seed,
              bool seeded) {
  const flockeval::DatasetManifest manifest =
      flockeval::parse_manifest(flockeval::read_file(common.manifest));
  std::optional<std::uint64_t> seed_opt;
  if (seeded) seed_opt = static_cast<std::uint64_t>(seed);
  const flockeval::FoldSpec spec = flockeval::make_folds(manifest, k,
                                                         seed_opt);
  emit(common.out, flockeval::serialize_foldspec(spec));
  if (common.stamp) write_stamp(common.out, false);
  return kExitOk;
}

int run_match(const CommonArgs& common, const std::string& pred_path,
              std::vector<double> alphas, const std::string& mode,
              int threads) {
  const flockeval::LoadedDataset dataset =
      flockeval::load_dataset(common.manifest);
  const std::vector<flockeval::Prediction> predictions =
      flockeval::parse_predictions(flockeval::read_file(pred_path));
  if (alphas.empty()) alphas.push_back(0.5);

  std::map<flockeval::FrameKey, const flockeval::FrameAnnotation*> frame_of;
  for (const flockeval::FrameAnnotation& frame : dataset.frames) {
    frame_of[{frame.video_id, frame.frame_index}] = &frame;
  }

  ordered_json doc;
  doc["mode"] = mode;
  ordered_json per_alpha = ordered_json::array();
  for (double alpha : alphas) {
    flockeval::MatchConfig cfg;
    cfg.alpha = alpha;
    cfg.mode = mode_from_string(mode);
    const flockeval::DatasetMatches matches = flockeval::match_dataset(
        dataset.frames, predictions, cfg, threads);
    ordered_json entry;
    entry["alpha"] = alpha;
    entry["tp"] = matches.pair_count();
    entry["fp"] = matches.false_positives();
    entry["fn"] = matches.false_negatives();
    ordered_json pairs = ordered_json::array();
    for (const flockeval::FrameMatch& frame : matches.frames) {
      const flockeval::FrameAnnotation* annotation = frame_of.at(frame.key);
      for (const flockeval::MatchPair& pair : frame.result.pairs) {
        const std::size_t bird_slot =
            frame.gt_bird_index[static_cast<std::size_t>(pair.gt_index)];
        ordered_json row;
        row["video"] = frame.key.video_id;
        row["frame"] = frame.key.frame_index;
        row["gt_bird_id"] = annotation->birds[bird_slot].bird_id;
        row["pred"] = frame.prediction_index[static_cast<std::size_t>(
            pair.pred_index)];
        row["iou"] = flockeval::round_ratio(pair.iou);
        pairs.push_back(std::move(row));
      }
    }
    entry["pairs"] = std::move(pairs);
    per_alpha.push_back(std::move(entry));
  }
  doc["alphas"] = std::move(per_alpha);
  emit(common.out, doc.dump(2) + "\n");
  if (common.stamp) write_stamp(common.out, false);
  return kExitOk;
}

int run_evaluate(const CommonArgs& common,
                 const std::vector<std::string>& pred_paths,
                 const std::string& folds_path,
                 const std::vector<double>& alphas, const std::string& mode,
                 double cls_alpha, int threads) {
  if (common.out.empty()) {
    throw UsageError("evaluate needs --out, a directory for report files");
  }
  const flockeval::LoadedDataset dataset =
      flockeval::load_dataset(common.manifest);
  flockeval::EvaluateConfig cfg;
  cfg.mode = mode_from_string(mode);
  cfg.extra_alphas = alphas;
  cfg.cls_alpha = cls_alpha;
  cfg.threads = threads;
  const fs::path out_dir(common.out);

  if (!folds_path.empty()) {
    const flockeval::FoldSpec spec =
        flockeval::parse_foldspec(flockeval::read_file(folds_path));
    std::vector<std::optional<std::vector<flockeval::Prediction>>> per_fold;
    for (const std::string& path : pred_paths) {
      if (path == "-") {
        per_fold.emplace_back(std::nullopt);
      } else {
        per_fold.emplace_back(
            flockeval::parse_predictions(flockeval::read_file(path)));
      }
    }
    const flockeval::FoldOutcome outcome =
        flockeval::fold_evaluate(spec, dataset.frames, per_fold, cfg);
    flockeval::write_file(out_dir / "fold_report.json",
                          flockeval::serialize_fold_outcome_json(outcome));
    flockeval::write_file(out_dir / "fold_detection.csv",
                          flockeval::fold_detection_csv(outcome));
  } else {
    if (pred_paths.size() != 1) {
      throw UsageError("evaluate needs exactly one --pred, or --folds with "
                       "one --pred per fold ('-' for a missing fold)");
    }
    const std::vector<flockeval::Prediction> predictions =
        flockeval::parse_predictions(flockeval::read_file(pred_paths[0]));
    const flockeval::MetricReport report =
        flockeval::evaluate_dataset(dataset.frames, predictions, cfg);
    flockeval::write_file(out_dir / "report.json",
                          flockeval::serialize_report_json(report));
    const std::pair<std::string, const flockeval::MetricReport*> row{
        "all", &report};
    flockeval::write_file(out_dir / "detection.csv",
                          flockeval::detection_csv({&row, 1}));
    flockeval::write_file(out_dir / "classification.csv",
                          flockeval::classification_csv(report));
    flockeval::write_file(out_dir / "pr_curves.csv",
                          flockeval::pr_curves_csv(report));
  }
  if (common.stamp) write_stamp(common.out, true);
  return kExitOk;
}

struct GenerateArgs {
  std::int64_t seed = 42;
  flockeval::SceneConfig scene;
  double jitter = 0.0;
  double drop = 0.0;
  double false_positive = 0.0;
  std::string label_kind = "behavior";
};

int run_generate(const CommonArgs& common, const GenerateArgs& args) {
  if (common.out.empty()) {
    throw UsageError("generate needs --out, a directory for the dataset");
  }
  const std::uint64_t seed = static_cast<std::uint64_t>(args.seed);
  const flockeval::SyntheticScene scene =
      flockeval::generate_scene(args.scene, seed);
  flockeval::write_scene(scene, common.out);

  flockeval::NoiseConfig noise;
  noise.jitter_sigma = args.jitter;
  noise.drop_rate = args.drop;
  noise.false_positive_rate = args.false_positive;
  if (args.label_kind == "behavior") {
    noise.label_kind = flockeval::LabelKind::Behavior;
  } else if (args.label_kind == "posture") {
    noise.label_kind = flockeval::LabelKind::Posture;
  } else {
    throw UsageError("unknown label kind '" + args.label_kind +
                     "', expected behavior or posture");
  }
  const flockeval::CorruptionResult corrupted =
      flockeval::corrupt(scene, noise, seed);
  const fs::path out_dir(common.out);
  flockeval::write_file(out_dir / "predictions.ndjson",
                        flockeval::serialize_predictions(
                            corrupted.predictions));
  flockeval::write_file(out_dir / "ledger.json",
                        flockeval::serialize_ledger(corrupted.ledger));
  if (common.stamp) write_stamp(common.out, true);
  return kExitOk;
}

int run_welfare(const CommonArgs& common, std::int64_t window,
                const std::vector<std::string>& rule_texts) {
  const flockeval::LoadedDataset dataset =
      flockeval::load_dataset(common.manifest);
  std::vector<flockeval::WelfareRule> rules;
  for (const std::string& text : rule_texts) rules.push_back(parse_rule(text));

  const std::vector<flockeval::BehaviorBudget> budgets =
      flockeval::sliding_budgets(dataset.frames, window);
  const std::string budgets_csv = flockeval::serialize_budgets_csv(budgets);
  std::string flags_json;
  if (!rules.empty()) {
    const std::vector<flockeval::WelfareFlag> flags =
        flockeval::evaluate_rules(budgets, rules);
    flags_json = flockeval::serialize_flags_json(flags, rules);
  }

  if (common.out.empty()) {
    std::fwrite(budgets_csv.data(), 1, budgets_csv.size(), stdout);
    if (!flags_json.empty()) {
      std::fwrite(flags_json.data(), 1, flags_json.size(), stdout);
    }
  } else {
    const fs::path out_dir(common.out);
    flockeval::write_file(out_dir / "budgets.csv", budgets_csv);
    if (!flags_json.empty()) {
      flockeval::write_file(out_dir / "flags.json", flags_json);
    }
  }
  if (common.stamp) write_stamp(common.out, true);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground-truth validation, matching, and evaluation toolkit "
               "for pen-level chicken annotation datasets"};
  app.require_subcommand(1);

  CommonArgs validate_args;
  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "Check a dataset and write a violation report");
  add_common(validate_cmd, &validate_args, true);

  CommonArgs split_args;
  int split_k = 5;
  std::int64_t split_seed = 0;
  CLI::App* split_cmd = app.add_subcommand(
      "split", "Write camera-grouped cross-validation folds over videos");
  add_common(split_cmd, &split_args, true);
  split_cmd->add_option("--k", split_k, "Fold count")->required();
  CLI::Option* split_seed_opt = split_cmd->add_option(
      "--seed", split_seed, "Shuffle videos with this seed before folding");

  CommonArgs match_args;
  std::string match_pred;
  std::vector<double> match_alphas;
  std::string match_mode = "bbox";
  int match_threads = 0;
  CLI::App* match_cmd = app.add_subcommand(
      "match", "Greedily match predictions to ground truth per frame");
  add_common(match_cmd, &match_args, true);
  match_cmd->add_option("--pred", match_pred, "Predictions NDJSON path")
      ->required();
  match_cmd->add_option("--alpha", match_alphas,
                        "IoU threshold, repeatable (default 0.5)")
      ->check(CLI::Range(0.0, 1.0));
  match_cmd->add_option("--mode", match_mode, "IoU mode: bbox or segm");
  match_cmd->add_option("--threads", match_threads,
                        "Worker threads, 0 = all cores");

  CommonArgs eval_args;
  std::vector<std::string> eval_preds;
  std::string eval_folds;
  std::vector<double> eval_alphas;
  std::string eval_mode = "bbox";
  double eval_cls_alpha = 0.5;
  int eval_threads = 0;
  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "Write detection and classification metric reports");
  add_common(eval_cmd, &eval_args, true);
  eval_cmd->add_option("--pred", eval_preds,
                       "Predictions NDJSON path; with --folds, one per fold "
                       "in order, '-' for a fold without predictions")
      ->required();
  eval_cmd->add_option("--folds", eval_folds, "Fold spec JSON path");
  eval_cmd->add_option("--alpha", eval_alphas,
                       "Extra IoU thresholds to report, repeatable")
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--mode", eval_mode, "IoU mode: bbox or segm");
  eval_cmd->add_option("--cls-alpha", eval_cls_alpha,
                       "IoU threshold pairing boxes for label metrics")
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--threads", eval_threads,
                       "Worker threads, 0 = all cores");

  CommonArgs gen_args;
  GenerateArgs gen;
  CLI::App* gen_cmd = app.add_subcommand(
      "generate", "Write a synthetic dataset, predictions, and ledger");
  add_common(gen_cmd, &gen_args, false);
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--birds", gen.scene.bird_count, "Birds per video");
  gen_cmd->add_option("--frames", gen.scene.frame_count, "Frames per video");
  gen_cmd->add_option("--videos", gen.scene.video_count, "Video count");
  gen_cmd->add_option("--camera", gen.scene.camera_id, "Camera id (1-3)");
  gen_cmd->add_option("--prefix", gen.scene.video_prefix,
                      "Video id prefix");
  gen_cmd->add_option("--width", gen.scene.frame_width, "Frame width");
  gen_cmd->add_option("--height", gen.scene.frame_height, "Frame height");
  gen_cmd->add_option("--nvs", gen.scene.nvs_rate,
                      "Per bird-frame not-visible probability")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--jitter", gen.jitter,
                      "Prediction translation noise sigma in pixels");
  gen_cmd->add_option("--drop", gen.drop, "Missed-detection probability")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--fp", gen.false_positive,
                      "Expected spurious detections per frame");
  gen_cmd->add_option("--label-kind", gen.label_kind,
                      "Predicted label view: behavior or posture");

  CommonArgs welfare_args;
  std::int64_t welfare_window = 300;
  std::vector<std::string> welfare_rules;
  CLI::App* welfare_cmd = app.add_subcommand(
      "welfare", "Write sliding behavior budgets and threshold flags");
  add_common(welfare_cmd, &welfare_args, true);
  welfare_cmd->add_option(
      "--window", welfare_window,
      "Window length in frames (default 300, five minutes at one frame "
      "per second)");
  welfare_cmd->add_option("--rule", welfare_rules,
                          "Threshold rule CODE<0.1[:N] or CODE>0.1[:N], "
                          "repeatable");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::vector<const char*> ptrs;
    ptrs.push_back(argv[0]);
    for (const std::string& arg : args) ptrs.push_back(arg.c_str());
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());

    if (*validate_cmd) return run_validate(validate_args);
    if (*split_cmd) {
      return run_split(split_args, split_k, split_seed,
                       split_seed_opt->count() > 0);
    }
    if (*match_cmd) {
      return run_match(match_args, match_pred, match_alphas, match_mode,
                       match_threads);
    }
    if (*eval_cmd) {
      return run_evaluate(eval_args, eval_preds, eval_folds, eval_alphas,
                          eval_mode, eval_cls_alpha, eval_threads);
    }
    if (*gen_cmd) return run_generate(gen_args, gen);
    if (*welfare_cmd) {
      return run_welfare(welfare_args, welfare_window, welfare_rules);
    }
    return kExitUsage;
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  } catch (const flockeval::IoError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitIo;
  } catch (const flockeval::Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitData;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitData;
  }
}
