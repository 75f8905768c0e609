#include "annorank/ranksvm.hpp"

#include "annorank/errors.hpp"
#include "annorank/minimize.hpp"
#include "annorank/rng.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace annorank {

namespace {

// Validates that ranks form a permutation of 1..M and returns pos[r-1] =
// candidate index holding rank r.
std::vector<int> rank_positions(const ImageFeatures& image) {
  const int m = static_cast<int>(image.ranks.size());
  if (m != image.features.rows()) {
    throw InvalidLabelsError("image '" + image.image_id + "': " +
                             std::to_string(m) + " labels for " +
                             std::to_string(image.features.rows()) +
                             " candidates");
  }
  std::vector<int> pos(static_cast<std::size_t>(m), -1);
  for (int j = 0; j < m; ++j) {
    const int r = image.ranks[j];
    if (r < 1 || r > m || pos[static_cast<std::size_t>(r - 1)] != -1) {
      throw InvalidLabelsError("image '" + image.image_id +
                               "': labels are not a permutation of 1.." +
                               std::to_string(m));
    }
    pos[static_cast<std::size_t>(r - 1)] = j;
  }
  return pos;
}

Eigen::Index feature_dim(const std::vector<ImageFeatures>& images) {
  Eigen::Index dim = -1;
  for (const ImageFeatures& image : images) {
    if (dim < 0) {
      dim = image.features.cols();
    } else if (image.features.cols() != dim) {
      throw DimensionMismatchError("image '" + image.image_id +
                                   "': feature dimensions " +
                                   std::to_string(dim) + " vs " +
                                   std::to_string(image.features.cols()));
    }
  }
  return dim;
}

void require_dim(const Eigen::Ref<const Vector>& w,
                 const std::vector<ImageFeatures>& images) {
  const Eigen::Index dim = feature_dim(images);
  if (dim >= 0 && w.size() != dim) {
    throw DimensionMismatchError("weights have dimension " +
                                 std::to_string(w.size()) +
                                 ", features have " + std::to_string(dim));
  }
}

}  // namespace

std::vector<double> default_c_grid() {
  return {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
}

std::vector<PreferencePair> generate_pairs(
    const std::vector<ImageFeatures>& images, std::optional<int> cap_per_image,
    std::uint64_t seed) {
  if (cap_per_image && *cap_per_image < 1) {
    throw ValidationError("pair cap must be at least 1");
  }
  std::vector<PreferencePair> pairs;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::vector<int> pos = rank_positions(images[i]);
    const int m = static_cast<int>(pos.size());

    std::vector<PreferencePair> image_pairs;
    image_pairs.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (int a = 0; a < m; ++a) {
      for (int b = a + 1; b < m; ++b) {
        image_pairs.push_back({static_cast<std::int32_t>(i),
                               static_cast<std::int32_t>(pos[a]),
                               static_cast<std::int32_t>(pos[b])});
      }
    }

    if (cap_per_image &&
        static_cast<std::size_t>(*cap_per_image) < image_pairs.size()) {
      // Uniform subsample, independent per image: draw the kept positions
      // with a partial Fisher-Yates, then restore enumeration order.
      Rng rng(derive_seed(seed, i));
      std::vector<std::size_t> index(image_pairs.size());
      std::iota(index.begin(), index.end(), 0);
      const std::size_t keep = static_cast<std::size_t>(*cap_per_image);
      for (std::size_t k = 0; k < keep; ++k) {
        const std::size_t pick =
            k + rng.uniform_int(static_cast<std::uint64_t>(index.size() - k));
        std::swap(index[k], index[pick]);
      }
      index.resize(keep);
      std::sort(index.begin(), index.end());
      std::vector<PreferencePair> kept;
      kept.reserve(keep);
      for (const std::size_t k : index) kept.push_back(image_pairs[k]);
      image_pairs = std::move(kept);
    }
    pairs.insert(pairs.end(), image_pairs.begin(), image_pairs.end());
  }
  return pairs;
}

double objective(const Eigen::Ref<const Vector>& w,
                 const std::vector<ImageFeatures>& images,
                 const std::vector<PreferencePair>& pairs, double c) {
  require_dim(w, images);
  std::vector<Vector> scores;
  scores.reserve(images.size());
  for (const ImageFeatures& image : images) {
    scores.push_back(image.features * w);
  }
  double loss = 0.0;
  for (const PreferencePair& p : pairs) {
    const Vector& s = scores[static_cast<std::size_t>(p.image)];
    const double t = 1.0 - (s[p.better] - s[p.worse]);
    if (t > 0.0) loss += t * t;
  }
  return 0.5 * w.squaredNorm() + c * loss;
}

Vector gradient(const Eigen::Ref<const Vector>& w,
                const std::vector<ImageFeatures>& images,
                const std::vector<PreferencePair>& pairs, double c) {
  require_dim(w, images);
  std::vector<Vector> scores;
  std::vector<Vector> coef;
  scores.reserve(images.size());
  coef.reserve(images.size());
  for (const ImageFeatures& image : images) {
    scores.push_back(image.features * w);
    coef.push_back(Vector::Zero(image.features.rows()));
  }
  // d/dw of c * max(0, 1 - w.(d_b - d_w))^2 is -2c(1 - margin)(d_b - d_w)
  // for active pairs; fold the pair sum into per-candidate coefficients so
  // the feature matrices are touched once.
  for (const PreferencePair& p : pairs) {
    const std::size_t i = static_cast<std::size_t>(p.image);
    const double t = 1.0 - (scores[i][p.better] - scores[i][p.worse]);
    if (t > 0.0) {
      const double u = 2.0 * c * t;
      coef[i][p.better] -= u;
      coef[i][p.worse] += u;
    }
  }
  Vector g = w;
  for (std::size_t i = 0; i < images.size(); ++i) {
    g.noalias() += images[i].features.transpose() * coef[i];
  }
  return g;
}

RankModel train(const LabeledData& data, double c, const TrainConfig& config) {
  if (!(c > 0.0)) {
    throw ValidationError("regularization weight must be positive");
  }
  const std::vector<PreferencePair> pairs =
      generate_pairs(data.images, config.pair_cap_per_image, config.seed);
  if (pairs.empty()) {
    throw NoPairsError("training data yields no preference pairs");
  }
  const Eigen::Index dim = feature_dim(data.images);

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

namespace {

// Fold score: annotation accuracy over the held-out images; pairwise
// accuracy when no held-out candidate clears the overlap threshold (the
// annotation metric would be identically zero there).
double fold_score(const RankModel& model,
                  const std::vector<ImageFeatures>& held_out) {
  bool any_positive = false;
  for (const ImageFeatures& image : held_out) {
    if (image.max_iou.size() > 0 && image.max_iou.maxCoeff() > 0.5) {
      any_positive = true;
      break;
    }
  }
  if (!any_positive) return pairwise_accuracy(model.weights, held_out);

  int correct = 0;
  for (const ImageFeatures& image : held_out) {
    const Vector scores = image.features * model.weights;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < scores.size(); ++j) {
      if (scores[j] > scores[best]) best = j;
    }
    if (image.max_iou[best] > 0.5) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(held_out.size());
}

}  // namespace

CrossValidationResult cross_validate(const LabeledData& data,
                                     const TrainConfig& config) {
  if (config.folds < 2) {
    throw ValidationError("cross-validation needs at least 2 folds");
  }
  if (config.c_grid.empty()) {
    throw ValidationError("cross-validation needs a non-empty C grid");
  }
  const std::size_t n = data.images.size();
  if (n < static_cast<std::size_t>(config.folds)) {
    throw TooFewImagesError(std::to_string(n) + " images for " +
                            std::to_string(config.folds) + " folds");
  }

  // Shuffled round-robin fold assignment on a stream separate from the
  // per-image pair-subsample streams.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng fold_rng(splitmix64(config.seed + 0x517cc1b727220a95ull));
  fold_rng.shuffle(order);
  std::vector<int> fold_of(n);
  for (std::size_t k = 0; k < n; ++k) {
    fold_of[order[k]] = static_cast<int>(k % static_cast<std::size_t>(config.folds));
  }

  std::vector<double> grid = config.c_grid;
  std::sort(grid.begin(), grid.end());

  CrossValidationResult result;
  double best_score = -1.0;
  for (const double c : grid) {
    double sum = 0.0;
    for (int fold = 0; fold < config.folds; ++fold) {
      LabeledData train_part;
      train_part.gt_mode = data.gt_mode;
      std::vector<ImageFeatures> held_out;
      for (std::size_t i = 0; i < n; ++i) {
        if (fold_of[i] == fold) {
          held_out.push_back(data.images[i]);
        } else {
          train_part.images.push_back(data.images[i]);
        }
      }
      const RankModel model = train(train_part, c, config);
      sum += fold_score(model, held_out);
    }
    const double mean = sum / static_cast<double>(config.folds);
    result.per_c_scores.emplace_back(c, mean);
    if (mean > best_score) {  // ascending grid: ties keep the smaller C
      best_score = mean;
      result.best_c = c;
    }
  }
  return result;
}

double score(const RankModel& model, const Eigen::Ref<const Vector>& diff) {
  if (diff.size() != model.weights.size()) {
    throw DimensionMismatchError("model dimension " +
                                 std::to_string(model.weights.size()) +
                                 ", feature dimension " +
                                 std::to_string(diff.size()));
  }
  return model.weights.dot(diff);
}

Vector score_all(const RankModel& model,
                 const Eigen::Ref<const Matrix>& feats) {
  if (feats.cols() != model.weights.size()) {
    throw DimensionMismatchError("model dimension " +
                                 std::to_string(model.weights.size()) +
                                 ", feature dimension " +
                                 std::to_string(feats.cols()));
  }
  return feats * model.weights;
}

double pairwise_accuracy(const Eigen::Ref<const Vector>& weights,
                         const std::vector<ImageFeatures>& images) {
  require_dim(weights, images);
  const std::vector<PreferencePair> pairs = generate_pairs(images);
  if (pairs.empty()) {
    throw NoPairsError("no preference pairs to score");
  }
  std::vector<Vector> scores;
  scores.reserve(images.size());
  for (const ImageFeatures& image : images) {
    scores.push_back(image.features * weights);
  }
  double sum = 0.0;
  for (const PreferencePair& p : pairs) {
    const Vector& s = scores[static_cast<std::size_t>(p.image)];
    if (s[p.better] > s[p.worse]) {
      sum += 1.0;
    } else if (s[p.better] == s[p.worse]) {
      sum += 0.5;
    }
  }
  return sum / static_cast<double>(pairs.size());
}

double pairwise_accuracy(const RankModel& model,
                         const std::vector<ImageFeatures>& images) {
  return pairwise_accuracy(model.weights, images);
}

}  // namespace annorank
