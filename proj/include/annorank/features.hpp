#pragma once

#include "annorank/types.hpp"

#include <vector>

namespace annorank {

/// h / ||h||_1. Throws ZeroHistogramError when the mass is zero and
/// ValidationError on negative or non-finite entries.
Vector l1_normalize(const Eigen::Ref<const Vector>& h);

/// Element-wise arithmetic mean of the rows (one histogram per row).
Vector mean_histogram(const Eigen::Ref<const Matrix>& histograms);
Vector mean_histogram(const std::vector<Vector>& histograms);

/// | x/||x||_1 - ref/||ref||_1 | element-wise. Entries lie in [0, 1] and the
/// result has L1 norm at most 2.
Vector diff_vector(const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& ref);

/// Candidate histograms stacked as rows. Throws DimensionMismatchError when
/// the candidates disagree on dimension.
Matrix histogram_matrix(const AnnotatedImage& image);

/// Difference vectors for every candidate of a training image, with rank
/// labels from the ground-truth geometry. In exact mode the reference is the
/// annotated ground-truth histogram; in approximate mode it is the mean of
/// the candidate histograms.
ImageFeatures build_training_features(const AnnotatedImage& image, GtMode mode);

/// Inference-side features: identical to approximate-mode training features,
/// without rank labels. Requires no ground truth.
Matrix build_target_features(const AnnotatedImage& image);

/// Feature-builds every image of the dataset. Every image must carry a
/// usable ground-truth box (and histogram, in exact mode).
LabeledData build_training_set(const std::vector<AnnotatedImage>& images,
                               GtMode mode);

}  // namespace annorank
