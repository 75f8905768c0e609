#include "annorank/baselines.hpp"

#include "annorank/errors.hpp"
#include "annorank/features.hpp"
#include "annorank/geometry.hpp"
#include "annorank/minimize.hpp"

#include <algorithm>
#include <string>

namespace annorank {

const char* to_string(FeatureSpace space) {
  return space == FeatureSpace::diff_vector ? "diff_vector" : "raw_histogram";
}

FeatureSpace feature_space_from_string(const std::string& name) {
  if (name == "diff_vector") return FeatureSpace::diff_vector;
  if (name == "raw_histogram") return FeatureSpace::raw_histogram;
  throw ValidationError("unknown feature space '" + name +
                        "' (expected diff_vector or raw_histogram)");
}

BinaryModel train_binary_svm(const Eigen::Ref<const Matrix>& rows,
                             const std::vector<int>& labels, double c,
                             const TrainConfig& config,
                             FeatureSpace feature_space) {
  if (!(c > 0.0)) {
    throw ValidationError("regularization weight must be positive");
  }
  const std::size_t n = static_cast<std::size_t>(rows.rows());
  if (labels.size() != n) {
    throw LengthMismatchError(std::to_string(labels.size()) + " labels for " +
                              std::to_string(n) + " rows");
  }
  bool has_pos = false;
  bool has_neg = false;
  Vector y(rows.rows());
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == 1) {
      has_pos = true;
    } else if (labels[i] == -1) {
      has_neg = true;
    } else {
      throw ValidationError("labels must be +1 or -1");
    }
    y[static_cast<Eigen::Index>(i)] = static_cast<double>(labels[i]);
  }
  if (!has_pos || !has_neg) {
    throw DegenerateLabelsError("training data contains a single class");
  }

  // theta = (w, b); the bias rides along unregularized.
  const Eigen::Index dim = rows.cols();
  const auto fn = [&](const Vector& theta, Vector& grad) {
    const Vector w = theta.head(dim);
    const double b = theta[dim];
    const Vector raw = rows * w;
    double loss = 0.0;
    Vector coef = Vector::Zero(rows.rows());
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
      const double t = 1.0 - y[i] * (raw[i] + b);
      if (t > 0.0) {
        loss += t * t;
        coef[i] = -2.0 * c * t * y[i];
      }
    }
    grad.resize(dim + 1);
    grad.head(dim) = w + rows.transpose() * coef;
    grad[dim] = coef.sum();
    return 0.5 * w.squaredNorm() + c * loss;
  };

  MinimizeOptions opts;
  opts.max_iterations = config.max_iterations;
  opts.gradient_tolerance = config.gradient_tolerance;
  opts.rel_objective_tolerance = config.rel_objective_tolerance;
  const MinimizeResult result = minimize(fn, Vector::Zero(dim + 1), opts);

  BinaryModel model;
  model.weights = result.x.head(dim);
  model.bias = result.x[dim];
  model.c = c;
  model.feature_space = feature_space;
  model.stats = {result.iterations, result.objective, result.gradient_norm};
  return model;
}

namespace {

double best_overlap(const BBox& box, const std::vector<BBox>& gts) {
  double best = 0.0;
  for (const BBox& gt : gts) best = std::max(best, iou(box, gt));
  return best;
}

}  // namespace

BinaryModel train_generic_detector(const std::vector<AnnotatedImage>& images,
                                   double c, const TrainConfig& config) {
  std::size_t total = 0;
  for (const AnnotatedImage& image : images) total += image.candidates.size();
  if (total == 0) {
    throw ValidationError("no candidate regions to train on");
  }

  Eigen::Index dim = -1;
  Matrix rows;
  std::vector<int> labels;
  labels.reserve(total);
  Eigen::Index row = 0;
  for (const AnnotatedImage& image : images) {
    const std::vector<BBox> gts = image.usable_ground_truth();
    if (gts.empty()) {
      throw MissingGroundTruthError("image '" + image.image_id +
                                    "' has no usable ground-truth box");
    }
    for (const Candidate& cand : image.candidates) {
      const Vector h = l1_normalize(cand.histogram);
      if (dim < 0) {
        dim = h.size();
        rows.resize(static_cast<Eigen::Index>(total), dim);
      } else if (h.size() != dim) {
        throw DimensionMismatchError("image '" + image.image_id +
                                     "': histogram dimensions " +
                                     std::to_string(dim) + " vs " +
                                     std::to_string(h.size()));
      }
      rows.row(row++) = h.transpose();
      labels.push_back(best_overlap(cand.box, gts) > 0.5 ? 1 : -1);
    }
  }
  return train_binary_svm(rows, labels, c, config,
                          FeatureSpace::raw_histogram);
}

RankModel train_two_rank(const LabeledData& data, double c,
                         const TrainConfig& config) {
  if (!(c > 0.0)) {
    throw ValidationError("regularization weight must be positive");
  }
  // Labels collapse to {over threshold, under threshold}; preference pairs
  // exist only across the boundary, enumerated in ascending index order.
  std::vector<PreferencePair> pairs;
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    const ImageFeatures& image = data.images[i];
    if (image.max_iou.size() != image.features.rows()) {
      throw ValidationError("image '" + image.image_id +
                            "' lacks per-candidate overlaps");
    }
    std::vector<int> over;
    std::vector<int> under;
    for (Eigen::Index j = 0; j < image.max_iou.size(); ++j) {
      (image.max_iou[j] > 0.5 ? over : under).push_back(static_cast<int>(j));
    }
    for (const int k : over) {
      for (const int l : under) {
        pairs.push_back({static_cast<std::int32_t>(i),
                         static_cast<std::int32_t>(k),
                         static_cast<std::int32_t>(l)});
      }
    }
  }
  if (pairs.empty()) {
    throw NoPairsError("no image has candidates on both sides of the "
                       "overlap threshold");
  }

  Eigen::Index dim = 0;
  for (const ImageFeatures& image : data.images) {
    dim = std::max(dim, image.features.cols());
  }
  MinimizeOptions opts;
  opts.max_iterations = config.max_iterations;
  opts.gradient_tolerance = config.gradient_tolerance;
  opts.rel_objective_tolerance = config.rel_objective_tolerance;
  const MinimizeResult result = minimize(
      [&](const Vector& w, Vector& grad) {
        grad = gradient(w, data.images, pairs, c);
        return objective(w, data.images, pairs, c);
      },
      Vector::Zero(dim), opts);

  RankModel model;
  model.weights = result.x;
  model.c = c;
  model.gt_mode = data.gt_mode;
  model.stats = {result.iterations, result.objective, result.gradient_norm};
  return model;
}

BinaryModel train_nonranking_svm(const LabeledData& data, double c,
                                 const TrainConfig& config) {
  std::size_t total = 0;
  for (const ImageFeatures& image : data.images) {
    total += static_cast<std::size_t>(image.features.rows());
  }
  if (total == 0) {
    throw ValidationError("no candidate regions to train on");
  }
  Eigen::Index dim = -1;
  Matrix rows;
  std::vector<int> labels;
  labels.reserve(total);
  Eigen::Index row = 0;
  for (const ImageFeatures& image : data.images) {
    if (image.max_iou.size() != image.features.rows()) {
      throw ValidationError("image '" + image.image_id +
                            "' lacks per-candidate overlaps");
    }
    if (dim < 0) {
      dim = image.features.cols();
      rows.resize(static_cast<Eigen::Index>(total), dim);
    } else if (image.features.cols() != dim) {
      throw DimensionMismatchError("image '" + image.image_id +
                                   "': feature dimensions " +
                                   std::to_string(dim) + " vs " +
                                   std::to_string(image.features.cols()));
    }
    for (Eigen::Index j = 0; j < image.features.rows(); ++j) {
      rows.row(row++) = image.features.row(j);
      labels.push_back(image.max_iou[j] > 0.5 ? 1 : -1);
    }
  }
  return train_binary_svm(rows, labels, c, config, FeatureSpace::diff_vector);
}

AnnotationResult annotate_with_binary(const BinaryModel& model,
                                      const AnnotatedImage& image) {
  Matrix feats;
  if (model.feature_space == FeatureSpace::diff_vector) {
    feats = build_target_features(image);
  } else {
    feats = histogram_matrix(image);
    for (Eigen::Index j = 0; j < feats.rows(); ++j) {
      feats.row(j) = l1_normalize(feats.row(j).transpose()).transpose();
    }
  }
  if (feats.cols() != model.weights.size()) {
    throw DimensionMismatchError("model dimension " +
                                 std::to_string(model.weights.size()) +
                                 ", feature dimension " +
                                 std::to_string(feats.cols()));
  }
  const Vector decisions = (feats * model.weights).array() + model.bias;

  AnnotationResult result;
  result.image_id = image.image_id;
  result.candidate_scores.assign(decisions.data(),
                                 decisions.data() + decisions.size());
  result.chosen_index = argmax_index(result.candidate_scores);
  result.chosen_box =
      image.candidates[static_cast<std::size_t>(result.chosen_index)].box;
  const std::vector<BBox> gts = image.usable_ground_truth();
  if (!gts.empty()) {
    result.correct = best_overlap(result.chosen_box, gts) > 0.5;
  }
  return result;
}

AnnotationResult objectness_baseline(const AnnotatedImage& image) {
  if (image.candidates.empty()) {
    throw ValidationError("image '" + image.image_id + "' has no candidates");
  }
  std::vector<double> scores;
  scores.reserve(image.candidates.size());
  for (const Candidate& cand : image.candidates) {
    if (!cand.objectness) {
      throw MissingScoresError("image '" + image.image_id +
                               "' has a candidate without an objectness "
                               "score");
    }
    scores.push_back(*cand.objectness);
  }

  AnnotationResult result;
  result.image_id = image.image_id;
  result.chosen_index = argmax_index(scores);
  result.chosen_box =
      image.candidates[static_cast<std::size_t>(result.chosen_index)].box;
  result.candidate_scores = std::move(scores);
  const std::vector<BBox> gts = image.usable_ground_truth();
  if (!gts.empty()) {
    result.correct = best_overlap(result.chosen_box, gts) > 0.5;
  }
  return result;
}

}  // namespace annorank
