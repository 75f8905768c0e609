#pragma once

#include "annorank/types.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace annorank {

/// One preference constraint: within image `image`, candidate `better` must
/// outrank candidate `worse`. Pairs never cross images.
struct PreferencePair {
  std::int32_t image = 0;
  std::int32_t better = 0;
  std::int32_t worse = 0;

  bool operator==(const PreferencePair&) const = default;
};

/// Trained ranking model: immutable after training.
struct RankModel {
  Vector weights;
  double c = 1.0;
  GtMode gt_mode = GtMode::approximate;
  TrainingStats stats;

  int dim() const { return static_cast<int>(weights.size()); }
};

std::vector<double> default_c_grid();

struct TrainConfig {
  std::vector<double> c_grid = default_c_grid();  // 1e-3 .. 1e3 by decades
  int folds = 5;
  int max_iterations = 1000;
  double rel_objective_tolerance = 1e-12;
  double gradient_tolerance = 1e-6;
  std::optional<int> pair_cap_per_image;  // no cap by default
  std::uint64_t seed = 0;
};

/// All within-image preference pairs, better-ranked member first. Each
/// image's labels must form a permutation of 1..M. With a cap, a uniform
/// random subsample of each image's pair set is kept, deterministic under
/// the seed and independent of the other images.
std::vector<PreferencePair> generate_pairs(
    const std::vector<ImageFeatures>& images,
    std::optional<int> cap_per_image = std::nullopt, std::uint64_t seed = 0);

/// 1/2 ||w||^2 + C * sum over pairs of max(0, 1 - w.(d_better - d_worse))^2.
double objective(const Eigen::Ref<const Vector>& w,
                 const std::vector<ImageFeatures>& images,
                 const std::vector<PreferencePair>& pairs, double c);

/// Exact gradient of the objective at w.
Vector gradient(const Eigen::Ref<const Vector>& w,
                const std::vector<ImageFeatures>& images,
                const std::vector<PreferencePair>& pairs, double c);

/// Minimizes the objective from w = 0 at fixed C. Deterministic given the
/// data and config. Throws NoPairsError when no preference pair exists.
RankModel train(const LabeledData& data, double c,
                const TrainConfig& config = {});

struct CrossValidationResult {
  double best_c = 1.0;
  std::vector<std::pair<double, double>> per_c_scores;  // (c, mean score)
};

/// k-fold selection of C over whole images. The fold score is annotation
/// accuracy on the held-out images (top-scored candidate overlaps a ground
/// truth by more than 0.5), falling back to pairwise accuracy when no
/// held-out candidate of the fold clears the overlap threshold. Ties break
/// toward smaller C.
CrossValidationResult cross_validate(const LabeledData& data,
                                     const TrainConfig& config = {});

/// w . d; inference orders candidates by descending score.
double score(const RankModel& model, const Eigen::Ref<const Vector>& diff);

/// Scores for every row of a feature matrix.
Vector score_all(const RankModel& model, const Eigen::Ref<const Matrix>& feats);

/// Fraction of within-image pairs whose score ordering matches the label
/// ordering; score ties count 0.5.
double pairwise_accuracy(const RankModel& model,
                         const std::vector<ImageFeatures>& images);
double pairwise_accuracy(const Eigen::Ref<const Vector>& weights,
                         const std::vector<ImageFeatures>& images);

}  // namespace annorank
