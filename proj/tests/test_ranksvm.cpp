#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "annorank/dataio.hpp"
#include "annorank/errors.hpp"
#include "annorank/features.hpp"
#include "annorank/minimize.hpp"
#include "annorank/ranksvm.hpp"
#include "annorank/rng.hpp"
#include "test_helpers.hpp"

#include <algorithm>
#include <set>
#include <vector>

using namespace annorank;
using test::vec;

namespace {

ImageFeatures make_feats(const std::string& id, const Matrix& rows,
                         const std::vector<int>& ranks,
                         const std::vector<double>& max_iou = {}) {
  ImageFeatures f;
  f.image_id = id;
  f.features = rows;
  f.ranks = Eigen::Map<const IntVector>(ranks.data(),
                                        static_cast<Eigen::Index>(ranks.size()));
  if (!max_iou.empty()) {
    f.max_iou = Eigen::Map<const Vector>(max_iou.data(),
                                         static_cast<Eigen::Index>(max_iou.size()));
  }
  return f;
}

ImageFeatures random_instance(Rng& rng, const std::string& id, int m, int dim) {
  Matrix rows(m, dim);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < dim; ++c) rows(r, c) = rng.uniform();
  }
  std::vector<int> ranks(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) ranks[static_cast<std::size_t>(r)] = r + 1;
  rng.shuffle(ranks);
  return make_feats(id, rows, ranks);
}

/// Two candidates per image, the better one separable by w = (t, -t).
LabeledData separable_data(int n_images) {
  LabeledData data;
  for (int i = 0; i < n_images; ++i) {
    Matrix rows(2, 2);
    rows << 1, 0, 0, 1;
    data.images.push_back(make_feats("sep" + std::to_string(i), rows, {1, 2},
                                     {0.9, 0.1}));
  }
  return data;
}

}  // namespace

TEST_CASE("generate_pairs enumerates within-image combinations") {
  Rng rng(3);
  const std::vector<ImageFeatures> one{random_instance(rng, "a", 3, 4)};
  CHECK(generate_pairs(one).size() == 3);

  const std::vector<ImageFeatures> big{random_instance(rng, "b", 100, 4)};
  CHECK(generate_pairs(big).size() == 4950);
}

TEST_CASE("pairs never cross images and point better-first") {
  Matrix rows(2, 2);
  rows << 1, 0, 0, 1;
  const std::vector<ImageFeatures> images{
      make_feats("a", rows, {1, 2}), make_feats("b", rows, {2, 1})};
  const std::vector<PreferencePair> pairs = generate_pairs(images);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == PreferencePair{0, 0, 1});
  CHECK(pairs[1] == PreferencePair{1, 1, 0});
}

TEST_CASE("generate_pairs rejects non-permutation labels") {
  Matrix rows(2, 2);
  rows << 1, 0, 0, 1;
  CHECK_THROWS_AS(generate_pairs({make_feats("dup", rows, {1, 1})}),
                  InvalidLabelsError);
  CHECK_THROWS_AS(generate_pairs({make_feats("range", rows, {0, 1})}),
                  InvalidLabelsError);
  CHECK_THROWS_AS(generate_pairs({make_feats("short", rows, {1})}),
                  InvalidLabelsError);
}

TEST_CASE("pair cap keeps a deterministic subset per image") {
  Rng rng(17);
  const std::vector<ImageFeatures> images{random_instance(rng, "a", 20, 4),
                                          random_instance(rng, "b", 20, 4)};
  const std::vector<PreferencePair> full = generate_pairs(images);
  REQUIRE(full.size() == 380);

  const std::vector<PreferencePair> capped = generate_pairs(images, 25, 9);
  CHECK(capped.size() == 50);
  CHECK(generate_pairs(images, 25, 9) == capped);
  CHECK(generate_pairs(images, 25, 10) != capped);

  const std::set<PreferencePair, bool (*)(const PreferencePair&, const PreferencePair&)>
      full_set(full.begin(), full.end(), [](const PreferencePair& x, const PreferencePair& y) {
        return std::tie(x.image, x.better, x.worse) <
               std::tie(y.image, y.better, y.worse);
      });
  for (const PreferencePair& p : capped) {
    CHECK(full_set.count(p) == 1);
  }

  CHECK(generate_pairs(images, 1000, 9) == full);
  CHECK_THROWS_AS(generate_pairs(images, 0, 9), ValidationError);
}

TEST_CASE("objective closed forms") {
  Rng rng(5);
  const std::vector<ImageFeatures> images{random_instance(rng, "a", 4, 3)};
  const std::vector<PreferencePair> pairs = generate_pairs(images);
  const double c = 2.5;

  CHECK(objective(Vector::Zero(3), images, pairs, c) ==
        doctest::Approx(c * static_cast<double>(pairs.size())));

  const Vector w = vec({0.3, -0.7, 1.1});
  CHECK(objective(w, images, {}, c) == doctest::Approx(0.5 * w.squaredNorm()));

  // A single pair at margin exactly 1 contributes no loss.
  Matrix rows(2, 2);
  rows << 1, 0, 0, 1;
  const std::vector<ImageFeatures> unit{make_feats("u", rows, {1, 2})};
  const Vector w_margin1 = vec({0.5, -0.5});
  CHECK(objective(w_margin1, unit, generate_pairs(unit), c) ==
        doctest::Approx(0.5 * w_margin1.squaredNorm()));
}

TEST_CASE("gradient closed forms") {
  Rng rng(6);
  const std::vector<ImageFeatures> images{random_instance(rng, "a", 3, 4)};
  CHECK(gradient(Vector::Zero(4), images, {}, 1.0).norm() == 0.0);

  // All pairs inactive: gradient reduces to the regularizer.
  Matrix rows(2, 2);
  rows << 1, 0, 0, 1;
  const std::vector<ImageFeatures> unit{make_feats("u", rows, {1, 2})};
  const Vector w = vec({2.0, -2.0});  // margin 4 > 1
  CHECK((gradient(w, unit, generate_pairs(unit), 3.0) - w).norm() == 0.0);
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(29);
  for (int instance = 0; instance < 6; ++instance) {
    const int dim = 3 + static_cast<int>(rng.uniform_int(10));
    const int m = 3 + static_cast<int>(rng.uniform_int(6));
    const std::vector<ImageFeatures> images{
        random_instance(rng, "fd", m, dim)};
    const std::vector<PreferencePair> pairs = generate_pairs(images);
    const double c = rng.uniform(0.2, 5.0);
    Vector w(dim);
    for (int k = 0; k < dim; ++k) w[k] = rng.normal();

    const Vector g = gradient(w, images, pairs, c);
    const double h = 1e-6;
    for (int k = 0; k < dim; ++k) {
      Vector lo = w, hi = w;
      lo[k] -= h;
      hi[k] += h;
      const double fd = (objective(hi, images, pairs, c) -
                         objective(lo, images, pairs, c)) /
                        (2.0 * h);
      CHECK(std::abs(g[k] - fd) / std::max(1.0, std::abs(g[k])) < 1e-5);
    }
  }
}

TEST_CASE("dimension mismatches are rejected") {
  Rng rng(8);
  const std::vector<ImageFeatures> images{random_instance(rng, "a", 3, 4)};
  const std::vector<PreferencePair> pairs = generate_pairs(images);
  CHECK_THROWS_AS(objective(Vector::Zero(3), images, pairs, 1.0),
                  DimensionMismatchError);
  CHECK_THROWS_AS(gradient(Vector::Zero(5), images, pairs, 1.0),
                  DimensionMismatchError);
}

TEST_CASE("train reaches near-zero loss on separable data") {
  const LabeledData data = separable_data(4);
  const RankModel model = train(data, 1000.0);
  const std::vector<PreferencePair> pairs = generate_pairs(data.images);
  const double total = objective(model.weights, data.images, pairs, 1000.0);
  const double loss = total - 0.5 * model.weights.squaredNorm();
  CHECK(loss < 1e-4);
  CHECK(model.c == 1000.0);
  CHECK(model.stats.iterations > 0);
}

TEST_CASE("train validates c and the pair supply") {
  const LabeledData data = separable_data(2);
  CHECK_THROWS_AS(train(data, 0.0), ValidationError);
  CHECK_THROWS_AS(train(data, -2.0), ValidationError);

  LabeledData singletons;
  singletons.images.push_back(make_feats("solo", Matrix::Ones(1, 2), {1}));
  CHECK_THROWS_AS(train(singletons, 1.0), NoPairsError);
}

TEST_CASE("train is deterministic") {
  Rng rng(13);
  LabeledData data;
  for (int i = 0; i < 5; ++i) {
    data.images.push_back(random_instance(rng, "d" + std::to_string(i), 6, 8));
  }
  const RankModel a = train(data, 2.0);
  const RankModel b = train(data, 2.0);
  CHECK(same_values(a.weights, b.weights));
  CHECK(a.stats.iterations == b.stats.iterations);
}

TEST_CASE("candidate reordering leaves final scores unchanged") {
  Rng rng(19);
  LabeledData data;
  for (int i = 0; i < 4; ++i) {
    data.images.push_back(random_instance(rng, "r" + std::to_string(i), 5, 6));
  }

  LabeledData shuffled = data;
  const std::vector<int> perm{3, 0, 4, 1, 2};  // applied to image 0
  const ImageFeatures& original = data.images[0];
  ImageFeatures& moved = shuffled.images[0];
  for (int row = 0; row < 5; ++row) {
    moved.features.row(row) = original.features.row(perm[static_cast<std::size_t>(row)]);
    moved.ranks[row] = original.ranks[perm[static_cast<std::size_t>(row)]];
  }

  const RankModel base = train(data, 3.0);
  const RankModel reordered = train(shuffled, 3.0);
  const Vector base_scores = score_all(base, original.features);
  const Vector new_scores = score_all(reordered, original.features);
  CHECK((base_scores - new_scores).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("cross_validate returns the singleton grid element") {
  LabeledData data = separable_data(6);
  TrainConfig config;
  config.c_grid = {0.7};
  config.folds = 3;
  const CrossValidationResult result = cross_validate(data, config);
  CHECK(result.best_c == 0.7);
  REQUIRE(result.per_c_scores.size() == 1);
  CHECK(result.per_c_scores[0].first == 0.7);
}

TEST_CASE("cross_validate breaks score ties toward the smallest C") {
  LabeledData data = separable_data(6);  // every C scores 1.0
  TrainConfig config;
  config.c_grid = {10.0, 0.1, 1.0};  // unsorted on purpose
  config.folds = 3;
  const CrossValidationResult result = cross_validate(data, config);
  CHECK(result.best_c == 0.1);
  for (const auto& [c, mean_score] : result.per_c_scores) {
    CHECK(mean_score == 1.0);
  }
  // Reported scores come back in ascending-C order.
  CHECK(result.per_c_scores.front().first == 0.1);
  CHECK(result.per_c_scores.back().first == 10.0);
}

TEST_CASE("cross_validate picks an interior C on a wide grid") {
  // Noisy generated data, grid spanning over- to under-regularized by six
  // decades. C = 1 beats both extremes, so selection is not an argmin or
  // argmax of the grid.
  SynthConfig cfg;
  cfg.n_images = 20;
  cfg.candidates_per_image = 8;
  cfg.dim = 25;
  cfg.noise_sigma = 1.2;
  cfg.profile.zero_fraction = 0.2;
  cfg.profile.min_iou = 0.3;
  cfg.profile.max_iou = 0.9;
  cfg.seed = 21;
  const LabeledData data =
      build_training_set(synth_generate(cfg).images, GtMode::approximate);

  TrainConfig config;
  config.c_grid = {1e-6, 1e-3, 1.0, 1e3, 1e6};
  config.folds = 4;
  config.max_iterations = 300;
  const CrossValidationResult result = cross_validate(data, config);

  CHECK(result.best_c == 1.0);
  REQUIRE(result.per_c_scores.size() == 5);
  const double interior = result.per_c_scores[2].second;
  CHECK(interior == doctest::Approx(0.80000000000000004).epsilon(1e-12));
  CHECK(result.per_c_scores[0].second ==
        doctest::Approx(0.75).epsilon(1e-12));
  CHECK(result.per_c_scores[4].second ==
        doctest::Approx(0.59999999999999998).epsilon(1e-12));
  CHECK(interior > result.per_c_scores[0].second);
  CHECK(interior > result.per_c_scores[1].second);
  CHECK(interior > result.per_c_scores[3].second);
  CHECK(interior > result.per_c_scores[4].second);
}

TEST_CASE("cross_validate validates its inputs") {
  LabeledData data = separable_data(6);
  TrainConfig config;
  config.folds = 1;
  CHECK_THROWS_AS(cross_validate(data, config), ValidationError);

  config.folds = 5;
  config.c_grid = {};
  CHECK_THROWS_AS(cross_validate(data, config), ValidationError);

  config.c_grid = {1.0};
  LabeledData tiny = separable_data(3);
  CHECK_THROWS_AS(cross_validate(tiny, config), TooFewImagesError);
}

TEST_CASE("score is linear and zero on zero input") {
  RankModel model;
  model.weights = vec({1.0, -2.0, 0.5});
  CHECK(score(model, vec({0, 0, 0})) == 0.0);

  RankModel zero;
  zero.weights = Vector::Zero(3);
  CHECK(score(zero, vec({0.4, 0.2, 0.9})) == 0.0);

  const Vector a = vec({0.2, 0.3, 0.1});
  const Vector b = vec({0.5, 0.0, 0.4});
  CHECK(score(model, 2.0 * a + b) ==
        doctest::Approx(2.0 * score(model, a) + score(model, b)));
  CHECK_THROWS_AS(score(model, vec({1, 2})), DimensionMismatchError);
}

TEST_CASE("score_all matches per-row scores") {
  Rng rng(37);
  RankModel model;
  model.weights = vec({0.3, -1.0, 0.7, 0.2});
  const ImageFeatures image = random_instance(rng, "s", 5, 4);
  const Vector scores = score_all(model, image.features);
  for (Eigen::Index r = 0; r < scores.size(); ++r) {
    CHECK(scores[r] == doctest::Approx(score(model, image.features.row(r).transpose())));
  }
}

TEST_CASE("pairwise_accuracy closed cases") {
  const LabeledData data = separable_data(3);

  CHECK(pairwise_accuracy(Vector::Zero(2), data.images) == 0.5);
  CHECK(pairwise_accuracy(vec({1.0, -1.0}), data.images) == 1.0);
  CHECK(pairwise_accuracy(vec({-1.0, 1.0}), data.images) == 0.0);

  CHECK_THROWS_AS(pairwise_accuracy(Vector::Zero(2),
                                    std::vector<ImageFeatures>{}),
                  NoPairsError);
}
