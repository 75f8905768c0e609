#pragma once

#include "annorank/annotator.hpp"
#include "annorank/ranksvm.hpp"
#include "annorank/types.hpp"

#include <string>
#include <vector>

namespace annorank {

/// Feature space a binary baseline was trained in; inference must build the
/// matching features.
enum class FeatureSpace { diff_vector, raw_histogram };

const char* to_string(FeatureSpace space);
FeatureSpace feature_space_from_string(const std::string& name);

/// Binary linear SVM with squared hinge loss and an (unregularized) bias.
struct BinaryModel {
  Vector weights;
  double bias = 0.0;
  double c = 1.0;
  FeatureSpace feature_space = FeatureSpace::diff_vector;
  TrainingStats stats;

  int dim() const { return static_cast<int>(weights.size()); }
};

/// Core binary trainer on explicit rows and +/-1 labels. Shared by the
/// generic detector and the non-ranking baseline; exposed for oracle tests.
BinaryModel train_binary_svm(const Eigen::Ref<const Matrix>& rows,
                             const std::vector<int>& labels, double c,
                             const TrainConfig& config,
                             FeatureSpace feature_space);

/// Generic object detector: binary SVM on L1-normalized raw histograms,
/// positive label iff the candidate overlaps a ground truth by more than 0.5.
BinaryModel train_generic_detector(const std::vector<AnnotatedImage>& images,
                                   double c, const TrainConfig& config = {});

/// Ranking ablation with labels collapsed to two levels at the 0.5-overlap
/// boundary; pairs exist only between the two levels.
RankModel train_two_rank(const LabeledData& data, double c,
                         const TrainConfig& config = {});

/// Binary SVM on the same difference-vector features the ranking model uses,
/// with the collapsed two-level labels as classes.
BinaryModel train_nonranking_svm(const LabeledData& data, double c,
                                 const TrainConfig& config = {});

/// Selects the candidate with the highest decision value w.phi(x) + b.
AnnotationResult annotate_with_binary(const BinaryModel& model,
                                      const AnnotatedImage& image);

/// Selects the candidate with the highest stored objectness score.
AnnotationResult objectness_baseline(const AnnotatedImage& image);

}  // namespace annorank
