#include "annorank/annotator.hpp"

#include "annorank/errors.hpp"
#include "annorank/features.hpp"
#include "annorank/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace annorank {

int argmax_index(const std::vector<double>& scores) {
  if (scores.empty()) {
    throw ValidationError("argmax of an empty score list");
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    if (scores[j] > scores[best]) best = j;
  }
  return static_cast<int>(best);
}

namespace {

std::optional<bool> correctness(const BBox& chosen,
                                const AnnotatedImage& image) {
  const std::vector<BBox> gts = image.usable_ground_truth();
  if (gts.empty()) return std::nullopt;
  for (const BBox& gt : gts) {
    if (iou(chosen, gt) > 0.5) return true;
  }
  return false;
}

AnnotationResult pick(const AnnotatedImage& image,
                      std::vector<double> scores) {
  AnnotationResult result;
  result.image_id = image.image_id;
  result.chosen_index = argmax_index(scores);
  result.chosen_box =
      image.candidates[static_cast<std::size_t>(result.chosen_index)].box;
  result.candidate_scores = std::move(scores);
  result.correct = correctness(result.chosen_box, image);
  return result;
}

}  // namespace

AnnotationResult annotate(const RankModel& model,
                          const AnnotatedImage& image) {
  const Matrix feats = build_target_features(image);
  const Vector scores = score_all(model, feats);
  return pick(image,
              std::vector<double>(scores.data(), scores.data() + scores.size()));
}

std::vector<double> fuse_scores(const std::vector<double>& model_scores,
                                const std::vector<double>& external_scores,
                                const FusionConfig& cfg) {
  if (model_scores.size() != external_scores.size()) {
    throw LengthMismatchError("score lists of length " +
                              std::to_string(model_scores.size()) + " and " +
                              std::to_string(external_scores.size()));
  }
  if (model_scores.empty()) {
    throw ValidationError("fuse_scores: empty score lists");
  }
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    throw ValidationError("fusion alpha must lie in [0, 1]");
  }
  for (const double s : external_scores) {
    if (!std::isfinite(s)) {
      throw ValidationError("external score is not finite");
    }
  }

  const auto normalized = [](const std::vector<double>& scores) {
    const auto [lo_it, hi_it] =
        std::minmax_element(scores.begin(), scores.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<double> out(scores.size(), 0.5);
    if (hi > lo) {
      for (std::size_t j = 0; j < scores.size(); ++j) {
        out[j] = (scores[j] - lo) / (hi - lo);
      }
    }
    return out;
  };

  const std::vector<double> m = normalized(model_scores);
  const std::vector<double> e = normalized(external_scores);
  std::vector<double> fused(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    fused[j] = cfg.alpha * m[j] + (1.0 - cfg.alpha) * e[j];
  }
  return fused;
}

AnnotationResult annotate_fused(const RankModel& model,
                                const AnnotatedImage& image,
                                const std::vector<double>& external_scores,
                                const FusionConfig& cfg) {
  const Matrix feats = build_target_features(image);
  const Vector scores = score_all(model, feats);
  return pick(image,
              fuse_scores(std::vector<double>(scores.data(),
                                              scores.data() + scores.size()),
                          external_scores, cfg));
}

}  // namespace annorank
