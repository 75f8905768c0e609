#include "annorank/eval.hpp"

#include "annorank/baselines.hpp"
#include "annorank/errors.hpp"
#include "annorank/features.hpp"
#include "annorank/geometry.hpp"
#include "annorank/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace annorank {

bool is_correct(const BBox& pred, const BBox& gt) {
  return iou(pred, gt) > 0.5;
}

bool is_correct_any(const BBox& pred, std::span<const BBox> gts) {
  for (const BBox& gt : gts) {
    if (is_correct(pred, gt)) return true;
  }
  return false;
}

EvalReport evaluate(const std::vector<AnnotationResult>& annotations,
                    const std::vector<AnnotatedImage>& dataset) {
  std::map<std::string, const AnnotatedImage*> by_id;
  for (const AnnotatedImage& image : dataset) {
    by_id[image.image_id] = &image;
  }

  EvalReport report;
  for (const AnnotationResult& annotation : annotations) {
    const auto it = by_id.find(annotation.image_id);
    if (it == by_id.end()) {
      throw ValidationError("annotation for unknown image '" +
                            annotation.image_id + "'");
    }
    const AnnotatedImage& image = *it->second;
    const std::vector<BBox> gts = image.usable_ground_truth();
    if (gts.empty()) {
      throw MissingGroundTruthError("image '" + image.image_id +
                                    "' has no usable ground-truth box");
    }
    const bool correct = is_correct_any(annotation.chosen_box, gts);
    ClassStats& stats = report.per_class[image.class_label];
    ++stats.n_images;
    ++report.n_images;
    if (correct) {
      ++stats.n_correct;
      ++report.n_correct;
    }
  }
  for (auto& [label, stats] : report.per_class) {
    stats.accuracy_percent =
        100.0 * static_cast<double>(stats.n_correct) /
        static_cast<double>(stats.n_images);
  }
  if (report.n_images > 0) {
    report.overall_accuracy_percent =
        100.0 * static_cast<double>(report.n_correct) /
        static_cast<double>(report.n_images);
  }
  return report;
}

const char* to_string(Method method) {
  switch (method) {
    case Method::ranking: return "ranking";
    case Method::two_rank: return "tworank";
    case Method::non_ranking: return "nonranking";
    case Method::generic_detector: return "generic";
    case Method::objectness: return "objectness";
  }
  throw ValidationError("unknown method");
}

Method method_from_string(const std::string& name) {
  if (name == "ranking") return Method::ranking;
  if (name == "tworank") return Method::two_rank;
  if (name == "nonranking") return Method::non_ranking;
  if (name == "generic") return Method::generic_detector;
  if (name == "objectness") return Method::objectness;
  throw ValidationError("unknown method '" + name +
                        "' (expected ranking, tworank, nonranking, generic, "
                        "or objectness)");
}

namespace {

std::vector<AnnotationResult> annotate_trial(
    const std::vector<const AnnotatedImage*>& aux,
    const std::vector<const AnnotatedImage*>& targets,
    const ProtocolConfig& config, double* selected_c) {
  std::vector<AnnotatedImage> aux_images;
  aux_images.reserve(aux.size());
  for (const AnnotatedImage* image : aux) aux_images.push_back(*image);

  *selected_c = 0.0;
  std::vector<AnnotationResult> results;
  results.reserve(targets.size());

  switch (config.method) {
    case Method::ranking: {
      const LabeledData data = build_training_set(aux_images, config.gt_mode);
      double c = config.c;
      if (config.cross_validate_c) {
        c = cross_validate(data, config.train).best_c;
      }
      const RankModel model = train(data, c, config.train);
      *selected_c = c;
      for (const AnnotatedImage* image : targets) {
        results.push_back(annotate(model, *image));
      }
      break;
    }
    case Method::two_rank: {
      const LabeledData data = build_training_set(aux_images, config.gt_mode);
      const RankModel model = train_two_rank(data, config.c, config.train);
      *selected_c = config.c;
      for (const AnnotatedImage* image : targets) {
        results.push_back(annotate(model, *image));
      }
      break;
    }
    case Method::non_ranking: {
      const LabeledData data = build_training_set(aux_images, config.gt_mode);
      const BinaryModel model =
          train_nonranking_svm(data, config.c, config.train);
      *selected_c = config.c;
      for (const AnnotatedImage* image : targets) {
        results.push_back(annotate_with_binary(model, *image));
      }
      break;
    }
    case Method::generic_detector: {
      const BinaryModel model =
          train_generic_detector(aux_images, config.c, config.train);
      *selected_c = config.c;
      for (const AnnotatedImage* image : targets) {
        results.push_back(annotate_with_binary(model, *image));
      }
      break;
    }
    case Method::objectness: {
      for (const AnnotatedImage* image : targets) {
        results.push_back(objectness_baseline(*image));
      }
      break;
    }
  }
  return results;
}

}  // namespace

ProtocolReport run_split_protocol(const std::vector<AnnotatedImage>& dataset,
                                  const ProtocolConfig& config) {
  if (config.trials < 1) {
    throw ValidationError("protocol needs at least 1 trial");
  }
  if (config.n_aux < 1) {
    throw ValidationError("protocol needs at least 1 auxiliary class");
  }

  // Images without a usable ground-truth box can serve neither role.
  std::vector<const AnnotatedImage*> usable;
  std::set<std::string> class_set;
  for (const AnnotatedImage& image : dataset) {
    if (image.has_ground_truth()) {
      usable.push_back(&image);
      class_set.insert(image.class_label);
    }
  }
  std::vector<std::string> classes(class_set.begin(), class_set.end());
  if (static_cast<int>(classes.size()) <= config.n_aux) {
    throw InsufficientClassesError(
        std::to_string(classes.size()) + " classes cannot split into " +
        std::to_string(config.n_aux) + " auxiliary plus at least 1 target");
  }

  ProtocolReport report;
  std::map<std::string, double> class_sum;
  std::map<std::string, int> class_count;
  for (int trial = 0; trial < config.trials; ++trial) {
    const std::uint64_t trial_seed =
        derive_seed(config.seed, static_cast<std::uint64_t>(trial));
    Rng rng(trial_seed);
    std::vector<std::string> shuffled = classes;
    rng.shuffle(shuffled);

    SplitSpec split;
    split.trial_seed = trial_seed;
    split.auxiliary_classes.assign(shuffled.begin(),
                                   shuffled.begin() + config.n_aux);
    split.target_classes.assign(shuffled.begin() + config.n_aux,
                                shuffled.end());
    std::sort(split.auxiliary_classes.begin(), split.auxiliary_classes.end());
    std::sort(split.target_classes.begin(), split.target_classes.end());

    const std::set<std::string> aux_set(split.auxiliary_classes.begin(),
                                        split.auxiliary_classes.end());
    std::vector<const AnnotatedImage*> aux;
    std::vector<const AnnotatedImage*> targets;
    for (const AnnotatedImage* image : usable) {
      (aux_set.count(image->class_label) ? aux : targets).push_back(image);
    }

    TrialReport trial_report;
    trial_report.trial = trial;
    trial_report.split = std::move(split);
    const std::vector<AnnotationResult> annotations =
        annotate_trial(aux, targets, config, &trial_report.selected_c);

    std::vector<AnnotatedImage> target_images;
    target_images.reserve(targets.size());
    for (const AnnotatedImage* image : targets) {
      target_images.push_back(*image);
    }
    trial_report.report = evaluate(annotations, target_images);

    for (const auto& [label, stats] : trial_report.report.per_class) {
      class_sum[label] += stats.accuracy_percent;
      class_count[label] += 1;
    }
    report.trials.push_back(std::move(trial_report));
  }

  for (const auto& [label, sum] : class_sum) {
    report.per_class_mean_percent[label] = sum / class_count[label];
    report.per_class_trial_count[label] = class_count[label];
  }

  double mean = 0.0;
  for (const TrialReport& trial : report.trials) {
    mean += trial.report.overall_accuracy_percent;
  }
  mean /= static_cast<double>(report.trials.size());
  double var = 0.0;
  for (const TrialReport& trial : report.trials) {
    const double d = trial.report.overall_accuracy_percent - mean;
    var += d * d;
  }
  var /= static_cast<double>(report.trials.size());
  report.overall_mean_percent = mean;
  report.overall_std_percent = std::sqrt(var);
  return report;
}

}  // namespace annorank
