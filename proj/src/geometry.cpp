#include "annorank/geometry.hpp"

#include "annorank/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace annorank {

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

double center_distance(const BBox& a, const BBox& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

std::vector<int> assign_ranks(std::span<const BBox> candidates,
                              const BBox& gt) {
  return assign_ranks(candidates, std::span<const BBox>(&gt, 1));
}

std::vector<int> assign_ranks(std::span<const BBox> candidates,
                              std::span<const BBox> gts) {
  if (candidates.empty()) {
    throw ValidationError("assign_ranks: no candidates");
  }
  if (gts.empty()) {
    throw MissingGroundTruthError("assign_ranks: no ground-truth boxes");
  }

  const std::size_t m = candidates.size();
  std::vector<double> overlap(m, 0.0);
  std::vector<double> distance(m, std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < m; ++j) {
    for (const BBox& gt : gts) {
      overlap[j] = std::max(overlap[j], iou(candidates[j], gt));
      distance[j] = std::min(distance[j], center_distance(candidates[j], gt));
    }
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const bool a_hits = overlap[a] > 0.0;
    const bool b_hits = overlap[b] > 0.0;
    if (a_hits != b_hits) return a_hits;
    if (a_hits) {
      if (overlap[a] != overlap[b]) return overlap[a] > overlap[b];
    } else {
      if (distance[a] != distance[b]) return distance[a] < distance[b];
    }
    return a < b;
  });

  std::vector<int> ranks(m);
  for (std::size_t pos = 0; pos < m; ++pos) {
    ranks[order[pos]] = static_cast<int>(pos) + 1;
  }
  return ranks;
}

}  // namespace annorank
