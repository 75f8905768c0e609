#include "annorank/types.hpp"

#include "annorank/errors.hpp"

namespace annorank {

const char* to_string(GtMode mode) {
  return mode == GtMode::exact ? "exact" : "approximate";
}

GtMode gt_mode_from_string(const std::string& name) {
  if (name == "exact") return GtMode::exact;
  if (name == "approximate") return GtMode::approximate;
  throw ValidationError("unknown gt mode '" + name +
                        "' (expected exact or approximate)");
}

std::vector<BBox> AnnotatedImage::usable_ground_truth() const {
  std::vector<BBox> usable;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    const bool flagged = i < difficult.size() && difficult[i];
    if (!flagged) usable.push_back(ground_truth[i]);
  }
  return usable;
}

bool operator==(const Candidate& a, const Candidate& b) {
  return a.box == b.box && a.objectness == b.objectness &&
         same_values(a.histogram, b.histogram);
}

bool operator==(const AnnotatedImage& a, const AnnotatedImage& b) {
  if (a.image_id != b.image_id || a.class_label != b.class_label ||
      a.width != b.width || a.height != b.height ||
      a.candidates != b.candidates || a.ground_truth != b.ground_truth ||
      a.difficult != b.difficult) {
    return false;
  }
  if (a.gt_histogram.has_value() != b.gt_histogram.has_value()) return false;
  return !a.gt_histogram || same_values(*a.gt_histogram, *b.gt_histogram);
}

}  // namespace annorank
