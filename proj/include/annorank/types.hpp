#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace annorank {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;

/// Axis-aligned box in continuous image coordinates, half-open convention:
/// area = (x2 - x1) * (y2 - y1). No VOC "+1" pixel term; inclusive-pixel
/// boxes are converted at ingest (see dataio::LoadOptions).
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && x2 > x1 && y2 > y1;
  }

  bool operator==(const BBox&) const = default;
};

/// Reference histogram used for the difference features: the annotated
/// ground-truth histogram, or its mean-of-candidates approximation.
enum class GtMode { exact, approximate };

const char* to_string(GtMode mode);
GtMode gt_mode_from_string(const std::string& name);

/// One candidate region: its spatial extent, optional saliency score from the
/// external proposal method, and its unnormalised bag-of-words histogram.
struct Candidate {
  BBox box;
  std::optional<double> objectness;
  Vector histogram;
};

/// One image record: the unit of a ranking query. Candidate regions plus
/// optional ground-truth boxes and ground-truth histogram.
struct AnnotatedImage {
  std::string image_id;
  std::string class_label;
  int width = 0;
  int height = 0;
  std::vector<Candidate> candidates;
  std::vector<BBox> ground_truth;  // may be empty
  std::vector<bool> difficult;     // parallel to ground_truth
  std::optional<Vector> gt_histogram;

  /// Ground-truth boxes not flagged difficult. Difficult instances never
  /// participate in rank assignment, training labels, or evaluation.
  std::vector<BBox> usable_ground_truth() const;

  bool has_ground_truth() const { return !usable_ground_truth().empty(); }
};

/// Training statistics recorded by the optimizer.
struct TrainingStats {
  int iterations = 0;
  double final_objective = 0.0;
  double final_gradient_norm = 0.0;
};

/// Difference-vector features of one image, ready for pair generation.
/// Row j of `features` is the difference vector of candidate j; entries lie
/// in [0, 1] and each row has L1 norm at most 2.
struct ImageFeatures {
  std::string image_id;
  Matrix features;   // M x D
  IntVector ranks;   // permutation of 1..M, 1 = best; empty for target images
  Vector max_iou;    // per candidate, best overlap with any usable gt box
};

/// A feature-built training set plus the reference mode it was built with.
struct LabeledData {
  std::vector<ImageFeatures> images;
  GtMode gt_mode = GtMode::approximate;
};

inline bool same_values(const Vector& a, const Vector& b) {
  return a.size() == b.size() && a == b;
}

bool operator==(const Candidate& a, const Candidate& b);
bool operator==(const AnnotatedImage& a, const AnnotatedImage& b);

}  // namespace annorank
