#pragma once

#include "annorank/ranksvm.hpp"
#include "annorank/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace annorank {

/// Outcome of annotating one image. chosen_index attains the maximum of
/// candidate_scores; ties resolve to the lowest index.
struct AnnotationResult {
  std::string image_id;
  int chosen_index = 0;
  BBox chosen_box;
  std::vector<double> candidate_scores;
  std::optional<bool> correct;  // present when ground truth is known
};

/// Score-level fusion: per-image min-max normalization of both lists, then
/// alpha * model + (1 - alpha) * external.
struct FusionConfig {
  double alpha = 0.5;
};

/// Index of the maximum score, lowest index on ties.
int argmax_index(const std::vector<double>& scores);

/// Ranks the image's candidates with the model and selects the top one.
/// Ground truth is read only to fill `correct`.
AnnotationResult annotate(const RankModel& model, const AnnotatedImage& image);

/// Min-max normalizes each list to [0,1] within the image (a constant list
/// becomes all 0.5), then combines them convexly.
std::vector<double> fuse_scores(const std::vector<double>& model_scores,
                                const std::vector<double>& external_scores,
                                const FusionConfig& cfg);

/// annotate() with the fused score replacing the model score.
AnnotationResult annotate_fused(const RankModel& model,
                                const AnnotatedImage& image,
                                const std::vector<double>& external_scores,
                                const FusionConfig& cfg);

}  // namespace annorank
