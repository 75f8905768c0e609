#include "annorank/features.hpp"

#include "annorank/errors.hpp"
#include "annorank/geometry.hpp"

#include <algorithm>
#include <string>

namespace annorank {

namespace {

void require_histogram(const Eigen::Ref<const Vector>& h) {
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!std::isfinite(h[i]) || h[i] < 0.0) {
      throw ValidationError("histogram entry " + std::to_string(i) +
                            " is negative or non-finite");
    }
  }
}

}  // namespace

Vector l1_normalize(const Eigen::Ref<const Vector>& h) {
  require_histogram(h);
  const double mass = h.sum();
  if (mass <= 0.0) {
    throw ZeroHistogramError("histogram has zero L1 mass");
  }
  return h / mass;
}

Vector mean_histogram(const Eigen::Ref<const Matrix>& histograms) {
  if (histograms.rows() == 0) {
    throw ValidationError("mean_histogram: no histograms");
  }
  return histograms.colwise().mean().transpose();
}

Vector mean_histogram(const std::vector<Vector>& histograms) {
  if (histograms.empty()) {
    throw ValidationError("mean_histogram: no histograms");
  }
  const Eigen::Index dim = histograms.front().size();
  Vector mean = Vector::Zero(dim);
  for (const Vector& h : histograms) {
    if (h.size() != dim) {
      throw DimensionMismatchError(
          "mean_histogram: dimensions " + std::to_string(dim) + " vs " +
          std::to_string(h.size()));
    }
    mean += h;
  }
  return mean / static_cast<double>(histograms.size());
}

Vector diff_vector(const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& ref) {
  if (x.size() != ref.size()) {
    throw DimensionMismatchError("diff_vector: dimensions " +
                                 std::to_string(x.size()) + " vs " +
                                 std::to_string(ref.size()));
  }
  return (l1_normalize(x) - l1_normalize(ref)).cwiseAbs();
}

Matrix histogram_matrix(const AnnotatedImage& image) {
  if (image.candidates.empty()) {
    throw ValidationError("image '" + image.image_id + "' has no candidates");
  }
  const Eigen::Index dim = image.candidates.front().histogram.size();
  Matrix rows(static_cast<Eigen::Index>(image.candidates.size()), dim);
  for (std::size_t j = 0; j < image.candidates.size(); ++j) {
    const Vector& h = image.candidates[j].histogram;
    if (h.size() != dim) {
      throw DimensionMismatchError("image '" + image.image_id +
                                   "': candidate histogram dimensions " +
                                   std::to_string(dim) + " vs " +
                                   std::to_string(h.size()));
    }
    rows.row(static_cast<Eigen::Index>(j)) = h.transpose();
  }
  return rows;
}

namespace {

Matrix diff_rows(const AnnotatedImage& image, const Vector& reference) {
  const Matrix hists = histogram_matrix(image);
  Matrix rows(hists.rows(), hists.cols());
  for (Eigen::Index j = 0; j < hists.rows(); ++j) {
    rows.row(j) = diff_vector(hists.row(j).transpose(), reference).transpose();
  }
  return rows;
}

}  // namespace

ImageFeatures build_training_features(const AnnotatedImage& image,
                                      GtMode mode) {
  const std::vector<BBox> gts = image.usable_ground_truth();
  if (gts.empty()) {
    throw MissingGroundTruthError("image '" + image.image_id +
                                  "' has no usable ground-truth box");
  }

  Vector reference;
  if (mode == GtMode::exact) {
    if (!image.gt_histogram) {
      throw MissingGroundTruthError("image '" + image.image_id +
                                    "' lacks the ground-truth histogram "
                                    "required by exact mode");
    }
    reference = *image.gt_histogram;
  } else {
    reference = mean_histogram(histogram_matrix(image));
  }

  ImageFeatures out;
  out.image_id = image.image_id;
  out.features = diff_rows(image, reference);

  std::vector<BBox> boxes;
  boxes.reserve(image.candidates.size());
  for (const Candidate& c : image.candidates) boxes.push_back(c.box);
  const std::vector<int> ranks = assign_ranks(boxes, gts);
  out.ranks = Eigen::Map<const IntVector>(ranks.data(),
                                          static_cast<Eigen::Index>(ranks.size()));

  out.max_iou = Vector::Zero(static_cast<Eigen::Index>(boxes.size()));
  for (std::size_t j = 0; j < boxes.size(); ++j) {
    for (const BBox& gt : gts) {
      out.max_iou[static_cast<Eigen::Index>(j)] =
          std::max(out.max_iou[static_cast<Eigen::Index>(j)],
                   iou(boxes[j], gt));
    }
  }
  return out;
}

Matrix build_target_features(const AnnotatedImage& image) {
  return diff_rows(image, mean_histogram(histogram_matrix(image)));
}

LabeledData build_training_set(const std::vector<AnnotatedImage>& images,
                               GtMode mode) {
  LabeledData data;
  data.gt_mode = mode;
  data.images.reserve(images.size());
  Eigen::Index dim = -1;
  for (const AnnotatedImage& image : images) {
    ImageFeatures feats = build_training_features(image, mode);
    if (dim < 0) {
      dim = feats.features.cols();
    } else if (feats.features.cols() != dim) {
      throw DimensionMismatchError("image '" + image.image_id +
                                   "': feature dimensions " +
                                   std::to_string(dim) + " vs " +
                                   std::to_string(feats.features.cols()));
    }
    data.images.push_back(std::move(feats));
  }
  return data;
}

}  // namespace annorank
