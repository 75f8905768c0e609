#pragma once

#include "annorank/annotator.hpp"
#include "annorank/ranksvm.hpp"
#include "annorank/types.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace annorank {

/// Strictly-greater-than-0.5 overlap test.
bool is_correct(const BBox& pred, const BBox& gt);

/// Correct when the prediction matches any of the boxes.
bool is_correct_any(const BBox& pred, std::span<const BBox> gts);

struct ClassStats {
  int n_images = 0;
  int n_correct = 0;
  double accuracy_percent = 0.0;
};

struct EvalReport {
  std::map<std::string, ClassStats> per_class;
  int n_images = 0;
  int n_correct = 0;
  double overall_accuracy_percent = 0.0;
};

/// Per-class and overall percentage of images whose chosen box overlaps a
/// usable ground-truth box by more than 0.5. Every annotated image must be
/// present in the dataset and carry usable ground truth.
EvalReport evaluate(const std::vector<AnnotationResult>& annotations,
                    const std::vector<AnnotatedImage>& dataset);

enum class Method { ranking, two_rank, non_ranking, generic_detector, objectness };

const char* to_string(Method method);
Method method_from_string(const std::string& name);

/// One trial's class split.
struct SplitSpec {
  std::vector<std::string> auxiliary_classes;
  std::vector<std::string> target_classes;
  std::uint64_t trial_seed = 0;
};

struct TrialReport {
  int trial = 0;
  SplitSpec split;
  double selected_c = 0.0;  // 0 for methods without a trained C
  EvalReport report;
};

struct ProtocolReport {
  std::vector<TrialReport> trials;
  /// Per class, mean accuracy over the trials in which it was a target.
  std::map<std::string, double> per_class_mean_percent;
  std::map<std::string, int> per_class_trial_count;
  double overall_mean_percent = 0.0;
  double overall_std_percent = 0.0;  // population std across trials
};

struct ProtocolConfig {
  int n_aux = 10;
  int trials = 10;
  std::uint64_t seed = 0;
  Method method = Method::ranking;
  GtMode gt_mode = GtMode::approximate;
  double c = 1.0;
  bool cross_validate_c = false;
  TrainConfig train;
};

/// Random auxiliary/target class splits repeated over trials: per trial,
/// sample n_aux auxiliary classes without replacement, train the method on
/// their images, annotate every target-class image, and evaluate. Each
/// trial's RNG stream derives from (seed, trial_index).
ProtocolReport run_split_protocol(const std::vector<AnnotatedImage>& dataset,
                                  const ProtocolConfig& config);

}  // namespace annorank
