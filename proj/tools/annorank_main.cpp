// Command-line driver: synth, train, cross-validate, annotate, fuse,
// baseline, evaluate, split-protocol. Progress goes to stderr; data goes to
// stdout or --out files. Every --out artifact gets a sibling
// <out>.manifest.json recording the command, flags, input/output digests,
// and wall-clock timing. Exit codes: 0 success, 1 data/validation error,
// 2 usage error.

#include "annorank/annotator.hpp"
#include "annorank/baselines.hpp"
#include "annorank/dataio.hpp"
#include "annorank/errors.hpp"
#include "annorank/eval.hpp"
#include "annorank/features.hpp"
#include "annorank/geometry.hpp"
#include "annorank/ranksvm.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using annorank::AnnotatedImage;
using annorank::AnnotationResult;
using json = nlohmann::json;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "missing";
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

// One manifest per command run, written beside the primary output. Wall
// clock lives only here so the data artifacts stay byte-identical across
// reruns.
struct ManifestWriter {
  std::string command;
  json config = json::object();
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::chrono::steady_clock::time_point started =
      std::chrono::steady_clock::now();
  std::chrono::system_clock::time_point wall_started =
      std::chrono::system_clock::now();

  void write() const {
    if (outputs.empty()) return;
    json manifest;
    manifest["command"] = command;
    manifest["config"] = config;
    json in = json::object();
    for (const auto& path : inputs) in[path.string()] = file_digest(path);
    manifest["inputs"] = in;
    json out = json::object();
    for (const auto& path : outputs) out[path.string()] = file_digest(path);
    manifest["outputs"] = out;
    const auto wall = std::chrono::system_clock::to_time_t(wall_started);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ",
                  std::gmtime(&wall));
    manifest["wall_clock_utc"] = stamp;
    manifest["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    const std::filesystem::path path =
        outputs.front().string() + ".manifest.json";
    std::ofstream file(path, std::ios::binary);
    file << manifest.dump(2) << '\n';
  }
};

std::vector<double> parse_c_grid(const std::string& text) {
  std::vector<double> grid;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    const std::string token = text.substr(pos, next - pos);
    try {
      grid.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw annorank::ValidationError("bad C grid entry '" + token + "'");
    }
    if (grid.back() <= 0.0) {
      throw annorank::ValidationError("C grid entries must be positive");
    }
    pos = next + 1;
  }
  if (grid.empty()) {
    throw annorank::ValidationError("empty C grid");
  }
  return grid;
}

void print_eval_table(const annorank::EvalReport& report, std::ostream& os) {
  std::size_t width = 7;
  for (const auto& [label, stats] : report.per_class) {
    width = std::max(width, label.size());
  }
  char line[160];
  std::snprintf(line, sizeof(line), "%-*s %8s %8s %9s", static_cast<int>(width),
                "class", "images", "correct", "accuracy");
  os << line << '\n';
  for (const auto& [label, stats] : report.per_class) {
    std::snprintf(line, sizeof(line), "%-*s %8d %8d %8.2f%%",
                  static_cast<int>(width), label.c_str(), stats.n_images,
                  stats.n_correct, stats.accuracy_percent);
    os << line << '\n';
  }
  std::snprintf(line, sizeof(line), "%-*s %8d %8d %8.2f%%",
                static_cast<int>(width), "overall", report.n_images,
                report.n_correct, report.overall_accuracy_percent);
  os << line << '\n';
}

json eval_report_to_json(const annorank::EvalReport& report) {
  json per_class = json::object();
  for (const auto& [label, stats] : report.per_class) {
    per_class[label] = {{"n_images", stats.n_images},
                        {"n_correct", stats.n_correct},
                        {"accuracy_percent", stats.accuracy_percent}};
  }
  return {{"per_class", per_class},
          {"n_images", report.n_images},
          {"n_correct", report.n_correct},
          {"overall_accuracy_percent", report.overall_accuracy_percent}};
}

json protocol_report_to_json(const annorank::ProtocolReport& report) {
  json trials = json::array();
  for (const annorank::TrialReport& trial : report.trials) {
    trials.push_back(
        {{"trial", trial.trial},
         {"auxiliary_classes", trial.split.auxiliary_classes},
         {"target_classes", trial.split.target_classes},
         {"trial_seed", trial.split.trial_seed},
         {"selected_c", trial.selected_c},
         {"report", eval_report_to_json(trial.report)}});
  }
  return {{"trials", trials},
          {"per_class_mean_percent", report.per_class_mean_percent},
          {"per_class_trial_count", report.per_class_trial_count},
          {"overall_mean_percent", report.overall_mean_percent},
          {"overall_std_percent", report.overall_std_percent}};
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw annorank::Error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

struct SynthArgs {
  annorank::SynthConfig cfg;
  std::string out;
  std::string oracle_out;
};

struct TrainArgs {
  std::string data;
  std::string out;
  double c = 1.0;
  bool cv = false;
  std::string gt_mode = "approximate";
  std::string c_grid;
  int folds = 5;
  int pair_cap = 0;
  int max_iterations = 1000;
  std::uint64_t seed = 0;
};

struct CrossValidateArgs {
  std::string data;
  std::string out;
  std::string gt_mode = "approximate";
  std::string c_grid;
  int folds = 5;
  int pair_cap = 0;
  int max_iterations = 1000;
  std::uint64_t seed = 0;
};

struct AnnotateArgs {
  std::string model;
  std::string data;
  std::string out;
  double fuse_alpha = -1.0;  // <0 means no fusion
};

struct FuseArgs {
  std::string data;
  std::string model_results;
  std::string external_results;
  std::string out;
  double alpha = 0.5;
};

struct BaselineArgs {
  std::string data;
  std::string kind;
  std::string out;
  std::string model_out;
  std::string gt_mode = "approximate";
  double c = 1.0;
  int max_iterations = 1000;
  std::uint64_t seed = 0;
};

struct EvaluateArgs {
  std::string results;
  std::string data;
  std::string out;
};

struct ProtocolArgs {
  std::string data;
  std::string out;
  std::string method = "ranking";
  std::string gt_mode = "approximate";
  int n_aux = 10;
  int trials = 10;
  double c = 1.0;
  bool cv = false;
  std::string c_grid;
  int folds = 5;
  int max_iterations = 1000;
  std::uint64_t seed = 0;
};

annorank::TrainConfig make_train_config(const std::string& c_grid, int folds,
                                        int pair_cap, int max_iterations,
                                        std::uint64_t seed) {
  annorank::TrainConfig config;
  if (!c_grid.empty()) config.c_grid = parse_c_grid(c_grid);
  config.folds = folds;
  if (pair_cap > 0) config.pair_cap_per_image = pair_cap;
  config.max_iterations = max_iterations;
  config.seed = seed;
  return config;
}

int run_synth(const SynthArgs& args) {
  ManifestWriter manifest;
  manifest.command = "synth";
  manifest.config = {{"n_images", args.cfg.n_images},
                     {"candidates_per_image", args.cfg.candidates_per_image},
                     {"dim", args.cfg.dim},
                     {"noise_sigma", args.cfg.noise_sigma},
                     {"zero_fraction", args.cfg.profile.zero_fraction},
                     {"min_iou", args.cfg.profile.min_iou},
                     {"max_iou", args.cfg.profile.max_iou},
                     {"hidden_signal_strength", args.cfg.hidden_signal_strength},
                     {"n_classes", args.cfg.n_classes},
                     {"seed", args.cfg.seed}};
  const annorank::SynthDataset dataset = annorank::synth_generate(args.cfg);
  annorank::save_dataset(dataset.images, args.out);
  manifest.outputs.push_back(args.out);
  if (!args.oracle_out.empty()) {
    annorank::save_oracle(dataset.oracle, args.oracle_out);
    manifest.outputs.push_back(args.oracle_out);
  }
  manifest.write();
  std::cerr << "wrote " << dataset.images.size() << " images to " << args.out
            << '\n';
  return 0;
}

int run_train(const TrainArgs& args) {
  ManifestWriter manifest;
  manifest.command = "train";
  manifest.config = {{"c", args.c},          {"cv", args.cv},
                     {"gt_mode", args.gt_mode}, {"c_grid", args.c_grid},
                     {"folds", args.folds},  {"pair_cap", args.pair_cap},
                     {"max_iterations", args.max_iterations},
                     {"seed", args.seed}};
  manifest.inputs.push_back(args.data);

  const std::vector<AnnotatedImage> images = annorank::load_dataset(args.data);
  const annorank::LabeledData data = annorank::build_training_set(
      images, annorank::gt_mode_from_string(args.gt_mode));
  const annorank::TrainConfig config =
      make_train_config(args.c_grid, args.folds, args.pair_cap,
                        args.max_iterations, args.seed);

  double c = args.c;
  if (args.cv) {
    std::cerr << "cross-validating C over " << config.c_grid.size()
              << " grid points\n";
    c = annorank::cross_validate(data, config).best_c;
  }
  const annorank::RankModel model = annorank::train(data, c, config);
  annorank::save_model(model, args.out);
  manifest.outputs.push_back(args.out);
  manifest.write();

  std::cout << "selected_c " << model.c << '\n'
            << "iterations " << model.stats.iterations << '\n'
            << "final_objective " << model.stats.final_objective << '\n'
            << "final_gradient_norm " << model.stats.final_gradient_norm
            << '\n';
  return 0;
}

int run_cross_validate(const CrossValidateArgs& args) {
  ManifestWriter manifest;
  manifest.command = "cross-validate";
  manifest.config = {{"gt_mode", args.gt_mode}, {"c_grid", args.c_grid},
                     {"folds", args.folds},     {"pair_cap", args.pair_cap},
                     {"max_iterations", args.max_iterations},
                     {"seed", args.seed}};
  manifest.inputs.push_back(args.data);

  const std::vector<AnnotatedImage> images = annorank::load_dataset(args.data);
  const annorank::LabeledData data = annorank::build_training_set(
      images, annorank::gt_mode_from_string(args.gt_mode));
  const annorank::TrainConfig config =
      make_train_config(args.c_grid, args.folds, args.pair_cap,
                        args.max_iterations, args.seed);
  const annorank::CrossValidationResult result =
      annorank::cross_validate(data, config);

  char line[64];
  std::cout << "c score\n";
  for (const auto& [c, mean_score] : result.per_c_scores) {
    std::snprintf(line, sizeof(line), "%g %.6f", c, mean_score);
    std::cout << line << '\n';
  }
  std::cout << "best_c " << result.best_c << '\n';

  if (!args.out.empty()) {
    json scores = json::array();
    for (const auto& [c, mean_score] : result.per_c_scores) {
      scores.push_back({{"c", c}, {"score", mean_score}});
    }
    write_json_file({{"best_c", result.best_c}, {"per_c_scores", scores}},
                    args.out);
    manifest.outputs.push_back(args.out);
    manifest.write();
  }
  return 0;
}

int run_annotate(const AnnotateArgs& args) {
  ManifestWriter manifest;
  manifest.command = "annotate";
  manifest.config = {{"fuse_objectness_alpha", args.fuse_alpha}};
  manifest.inputs.push_back(args.model);
  manifest.inputs.push_back(args.data);

  const std::vector<AnnotatedImage> images = annorank::load_dataset(args.data);
  const annorank::AnyModel model = annorank::load_model(args.model);

  std::vector<AnnotationResult> results;
  results.reserve(images.size());
  for (const AnnotatedImage& image : images) {
    if (std::holds_alternative<annorank::RankModel>(model)) {
      const auto& rank_model = std::get<annorank::RankModel>(model);
      if (args.fuse_alpha >= 0.0) {
        std::vector<double> external;
        external.reserve(image.candidates.size());
        for (const annorank::Candidate& cand : image.candidates) {
          if (!cand.objectness) {
            throw annorank::MissingScoresError(
                "image '" + image.image_id +
                "' has a candidate without an objectness score");
          }
          external.push_back(*cand.objectness);
        }
        results.push_back(annorank::annotate_fused(
            rank_model, image, external, {args.fuse_alpha}));
      } else {
        results.push_back(annorank::annotate(rank_model, image));
      }
    } else {
      if (args.fuse_alpha >= 0.0) {
        throw annorank::ValidationError(
            "--fuse-objectness applies to ranking models only");
      }
      results.push_back(annorank::annotate_with_binary(
          std::get<annorank::BinaryModel>(model), image));
    }
  }
  annorank::save_results(results, args.out);
  manifest.outputs.push_back(args.out);
  manifest.write();
  std::cerr << "annotated " << results.size() << " images\n";
  return 0;
}

int run_fuse(const FuseArgs& args) {
  ManifestWriter manifest;
  manifest.command = "fuse";
  manifest.config = {{"alpha", args.alpha}};
  manifest.inputs = {args.data, args.model_results, args.external_results};

  const std::vector<AnnotatedImage> images = annorank::load_dataset(args.data);
  std::map<std::string, const AnnotatedImage*> by_id;
  for (const AnnotatedImage& image : images) by_id[image.image_id] = &image;

  std::map<std::string, AnnotationResult> external;
  for (AnnotationResult& r : annorank::load_results(args.external_results)) {
    external[r.image_id] = std::move(r);
  }

  std::vector<AnnotationResult> fused;
  for (const AnnotationResult& model_result :
       annorank::load_results(args.model_results)) {
    const auto image_it = by_id.find(model_result.image_id);
    if (image_it == by_id.end()) {
      throw annorank::ValidationError("results reference unknown image '" +
                                      model_result.image_id + "'");
    }
    const auto external_it = external.find(model_result.image_id);
    if (external_it == external.end()) {
      throw annorank::ValidationError(
          "external results lack image '" + model_result.image_id + "'");
    }
    const AnnotatedImage& image = *image_it->second;
    if (model_result.candidate_scores.size() != image.candidates.size()) {
      throw annorank::LengthMismatchError(
          "image '" + image.image_id + "': scores do not match candidates");
    }
    const std::vector<double> scores = annorank::fuse_scores(
        model_result.candidate_scores,
        external_it->second.candidate_scores, {args.alpha});

    AnnotationResult out;
    out.image_id = image.image_id;
    out.chosen_index = annorank::argmax_index(scores);
    out.chosen_box =
        image.candidates[static_cast<std::size_t>(out.chosen_index)].box;
    out.candidate_scores = scores;
    const std::vector<annorank::BBox> gts = image.usable_ground_truth();
    if (!gts.empty()) {
      out.correct = annorank::is_correct_any(out.chosen_box, gts);
    }
    fused.push_back(std::move(out));
  }
  annorank::save_results(fused, args.out);
  manifest.outputs.push_back(args.out);
  manifest.write();
  std::cerr << "fused " << fused.size() << " images\n";
  return 0;
}

int run_baseline(const BaselineArgs& args) {
  ManifestWriter manifest;
  manifest.command = "baseline";
  manifest.config = {{"kind", args.kind},
                     {"c", args.c},
                     {"gt_mode", args.gt_mode},
                     {"max_iterations", args.max_iterations},
                     {"seed", args.seed}};
  manifest.inputs.push_back(args.data);

  const std::vector<AnnotatedImage> images = annorank::load_dataset(args.data);
  const annorank::Method method = annorank::method_from_string(args.kind);
  annorank::TrainConfig config =
      make_train_config("", 5, 0, args.max_iterations, args.seed);

  std::vector<AnnotationResult> results;
  results.reserve(images.size());
  switch (method) {
    case annorank::Method::objectness: {
      for (const AnnotatedImage& image : images) {
        results.push_back(annorank::objectness_baseline(image));
      }
      break;
    }
    case annorank::Method::two_rank: {
      const annorank::LabeledData data = annorank::build_training_set(
          images, annorank::gt_mode_from_string(args.gt_mode));
      const annorank::RankModel model =
          annorank::train_two_rank(data, args.c, config);
      if (!args.model_out.empty()) {
        annorank::save_model(model, args.model_out);
        manifest.outputs.push_back(args.model_out);
      }
      for (const AnnotatedImage& image : images) {
        results.push_back(annorank::annotate(model, image));
      }
      break;
    }
    case annorank::Method::non_ranking: {
      const annorank::LabeledData data = annorank::build_training_set(
          images, annorank::gt_mode_from_string(args.gt_mode));
      const annorank::BinaryModel model =
          annorank::train_nonranking_svm(data, args.c, config);
      if (!args.model_out.empty()) {
        annorank::save_model(model, args.model_out);
        manifest.outputs.push_back(args.model_out);
      }
      for (const AnnotatedImage& image : images) {
        results.push_back(annorank::annotate_with_binary(model, image));
      }
      break;
    }
    case annorank::Method::generic_detector: {
      const annorank::BinaryModel model =
          annorank::train_generic_detector(images, args.c, config);
      if (!args.model_out.empty()) {
        annorank::save_model(model, args.model_out);
        manifest.outputs.push_back(args.model_out);
      }
      for (const AnnotatedImage& image : images) {
        results.push_back(annorank::annotate_with_binary(model, image));
      }
      break;
    }
    case annorank::Method::ranking:
      throw annorank::ValidationError(
          "the ranking model is trained with the train command, not as a "
          "baseline");
  }
  annorank::save_results(results, args.out);
  manifest.outputs.push_back(args.out);
  // Keep the results file first so the manifest lands beside it.
  std::rotate(manifest.outputs.begin(), manifest.outputs.end() - 1,
              manifest.outputs.end());
  manifest.write();
  std::cerr << "annotated " << results.size() << " images with " << args.kind
            << '\n';
  return 0;
}

int run_evaluate(const EvaluateArgs& args) {
  ManifestWriter manifest;
  manifest.command = "evaluate";
  manifest.inputs = {args.results, args.data};

  const std::vector<AnnotatedImage> images = annorank::load_dataset(args.data);
  const std::vector<AnnotationResult> results =
      annorank::load_results(args.results);
  const annorank::EvalReport report = annorank::evaluate(results, images);
  print_eval_table(report, std::cout);
  if (!args.out.empty()) {
    write_json_file(eval_report_to_json(report), args.out);
    manifest.outputs.push_back(args.out);
    manifest.write();
  }
  return 0;
}

int run_split_protocol(const ProtocolArgs& args) {
  ManifestWriter manifest;
  manifest.command = "split-protocol";
  manifest.config = {{"method", args.method},
                     {"gt_mode", args.gt_mode},
                     {"n_aux", args.n_aux},
                     {"trials", args.trials},
                     {"c", args.c},
                     {"cv", args.cv},
                     {"c_grid", args.c_grid},
                     {"folds", args.folds},
                     {"max_iterations", args.max_iterations},
                     {"seed", args.seed}};
  manifest.inputs.push_back(args.data);

  const std::vector<AnnotatedImage> images = annorank::load_dataset(args.data);
  annorank::ProtocolConfig config;
  config.n_aux = args.n_aux;
  config.trials = args.trials;
  config.seed = args.seed;
  config.method = annorank::method_from_string(args.method);
  config.gt_mode = annorank::gt_mode_from_string(args.gt_mode);
  config.c = args.c;
  config.cross_validate_c = args.cv;
  config.train = make_train_config(args.c_grid, args.folds, 0,
                                   args.max_iterations, args.seed);

  const annorank::ProtocolReport report =
      annorank::run_split_protocol(images, config);

  char line[160];
  std::cout << "class mean_accuracy target_trials\n";
  for (const auto& [label, mean] : report.per_class_mean_percent) {
    std::snprintf(line, sizeof(line), "%s %.2f%% %d", label.c_str(), mean,
                  report.per_class_trial_count.at(label));
    std::cout << line << '\n';
  }
  std::snprintf(line, sizeof(line), "overall %.2f%% +- %.2f%% over %d trials",
                report.overall_mean_percent, report.overall_std_percent,
                static_cast<int>(report.trials.size()));
  std::cout << line << '\n';

  if (!args.out.empty()) {
    write_json_file(protocol_report_to_json(report), args.out);
    manifest.outputs.push_back(args.out);
    manifest.write();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ranking-based transfer learning for weakly supervised "
               "object annotation"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic candidate-region dataset");
  synth->add_option("--out", synth_args.out, "Dataset file to write")
      ->required();
  synth->add_option("--oracle", synth_args.oracle_out,
                    "Oracle record file to write");
  synth->add_option("--n-images", synth_args.cfg.n_images, "Image count");
  synth->add_option("--candidates", synth_args.cfg.candidates_per_image,
                    "Candidates per image");
  synth->add_option("--dim", synth_args.cfg.dim, "Histogram dimension");
  synth->add_option("--noise-sigma", synth_args.cfg.noise_sigma,
                    "Gaussian noise level on histogram entries");
  synth->add_option("--zero-fraction", synth_args.cfg.profile.zero_fraction,
                    "Fraction of candidates with no overlap");
  synth->add_option("--min-iou", synth_args.cfg.profile.min_iou,
                    "Smallest overlap of the overlapping candidates");
  synth->add_option("--max-iou", synth_args.cfg.profile.max_iou,
                    "Largest overlap of the overlapping candidates");
  synth->add_option("--signal-strength",
                    synth_args.cfg.hidden_signal_strength,
                    "How strongly background content differs from the object");
  synth->add_option("--classes", synth_args.cfg.n_classes, "Class count");
  synth->add_option("--seed", synth_args.cfg.seed, "RNG seed");

  TrainArgs train_args;
  CLI::App* train =
      app.add_subcommand("train", "Train the ranking model");
  train->add_option("--data", train_args.data, "Training dataset")->required();
  train->add_option("--out", train_args.out, "Model file to write")
      ->required();
  CLI::Option* train_c =
      train->add_option("--c", train_args.c, "Regularization weight");
  train->add_flag("--cv", train_args.cv,
                  "Select C by cross-validation instead of --c")
      ->excludes(train_c);
  train->add_option("--gt-mode", train_args.gt_mode,
                    "Reference histogram: exact or approximate");
  train->add_option("--c-grid", train_args.c_grid,
                    "Comma-separated C grid for --cv");
  train->add_option("--folds", train_args.folds, "Cross-validation folds");
  train->add_option("--pair-cap", train_args.pair_cap,
                    "Max preference pairs kept per image (0 = all)");
  train->add_option("--max-iterations", train_args.max_iterations,
                    "Optimizer iteration limit");
  train->add_option("--seed", train_args.seed, "RNG seed");

  CrossValidateArgs cv_args;
  CLI::App* cv = app.add_subcommand("cross-validate",
                                    "Score a C grid by k-fold validation");
  cv->add_option("--data", cv_args.data, "Training dataset")->required();
  cv->add_option("--out", cv_args.out, "Score report to write");
  cv->add_option("--gt-mode", cv_args.gt_mode,
                 "Reference histogram: exact or approximate");
  cv->add_option("--c-grid", cv_args.c_grid, "Comma-separated C grid");
  cv->add_option("--folds", cv_args.folds, "Fold count");
  cv->add_option("--pair-cap", cv_args.pair_cap,
                 "Max preference pairs kept per image (0 = all)");
  cv->add_option("--max-iterations", cv_args.max_iterations,
                 "Optimizer iteration limit");
  cv->add_option("--seed", cv_args.seed, "RNG seed");

  AnnotateArgs annotate_args;
  CLI::App* annotate = app.add_subcommand(
      "annotate", "Select one box per image with a trained model");
  annotate->add_option("--model", annotate_args.model, "Model file")
      ->required();
  annotate->add_option("--data", annotate_args.data, "Dataset to annotate")
      ->required();
  annotate->add_option("--out", annotate_args.out, "Results file to write")
      ->required();
  annotate->add_option("--fuse-objectness", annotate_args.fuse_alpha,
                       "Fuse with stored objectness scores at this alpha");

  FuseArgs fuse_args;
  CLI::App* fuse = app.add_subcommand(
      "fuse", "Fuse two per-candidate score files and re-select");
  fuse->add_option("--data", fuse_args.data, "Dataset the scores refer to")
      ->required();
  fuse->add_option("--model-results", fuse_args.model_results,
                   "Results carrying the model scores")
      ->required();
  fuse->add_option("--external-results", fuse_args.external_results,
                   "Results carrying the external scores")
      ->required();
  fuse->add_option("--out", fuse_args.out, "Fused results file")->required();
  fuse->add_option("--alpha", fuse_args.alpha,
                   "Weight on the model scores, in [0, 1]");

  BaselineArgs baseline_args;
  CLI::App* baseline = app.add_subcommand(
      "baseline", "Train and annotate with a baseline method");
  baseline->add_option("--data", baseline_args.data, "Dataset")->required();
  baseline->add_option("--kind", baseline_args.kind,
                       "generic, tworank, nonranking, or objectness")
      ->required();
  baseline->add_option("--out", baseline_args.out, "Results file to write")
      ->required();
  baseline->add_option("--model-out", baseline_args.model_out,
                       "Also write the trained model here");
  baseline->add_option("--c", baseline_args.c, "Regularization weight");
  baseline->add_option("--gt-mode", baseline_args.gt_mode,
                       "Reference histogram: exact or approximate");
  baseline->add_option("--max-iterations", baseline_args.max_iterations,
                       "Optimizer iteration limit");
  baseline->add_option("--seed", baseline_args.seed, "RNG seed");

  EvaluateArgs evaluate_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score annotation results against ground truth");
  evaluate->add_option("--results", evaluate_args.results, "Results file")
      ->required();
  evaluate->add_option("--data", evaluate_args.data, "Dataset with ground "
                       "truth")
      ->required();
  evaluate->add_option("--out", evaluate_args.out, "Report file to write");

  ProtocolArgs protocol_args;
  CLI::App* protocol = app.add_subcommand(
      "split-protocol",
      "Random auxiliary/target class splits, repeated over trials");
  protocol->add_option("--data", protocol_args.data, "Dataset")->required();
  protocol->add_option("--out", protocol_args.out, "Report file to write");
  protocol->add_option("--method", protocol_args.method,
                       "ranking, tworank, nonranking, generic, or objectness");
  protocol->add_option("--gt-mode", protocol_args.gt_mode,
                       "Reference histogram: exact or approximate");
  protocol->add_option("--n-aux", protocol_args.n_aux,
                       "Auxiliary classes per trial");
  protocol->add_option("--trials", protocol_args.trials, "Trial count");
  CLI::Option* protocol_c =
      protocol->add_option("--c", protocol_args.c, "Regularization weight");
  protocol->add_flag("--cv", protocol_args.cv,
                     "Cross-validate C per trial (ranking method only)")
      ->excludes(protocol_c);
  protocol->add_option("--c-grid", protocol_args.c_grid,
                       "Comma-separated C grid for --cv");
  protocol->add_option("--folds", protocol_args.folds,
                       "Cross-validation folds");
  protocol->add_option("--max-iterations", protocol_args.max_iterations,
                       "Optimizer iteration limit");
  protocol->add_option("--seed", protocol_args.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (train->parsed()) return run_train(train_args);
    if (cv->parsed()) return run_cross_validate(cv_args);
    if (annotate->parsed()) return run_annotate(annotate_args);
    if (fuse->parsed()) return run_fuse(fuse_args);
    if (baseline->parsed()) return run_baseline(baseline_args);
    if (evaluate->parsed()) return run_evaluate(evaluate_args);
    if (protocol->parsed()) return run_split_protocol(protocol_args);
  } catch (const annorank::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
