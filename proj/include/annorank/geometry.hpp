#pragma once

#include "annorank/types.hpp"

#include <span>
#include <vector>

namespace annorank {

/// Intersection area divided by union area. Symmetric, 0 for disjoint boxes,
/// 1 exactly when the boxes coincide.
double iou(const BBox& a, const BBox& b);

/// Euclidean distance between box centers.
double center_distance(const BBox& a, const BBox& b);

/// Rank candidates against the ground-truth box. Candidates with positive
/// overlap come first in strictly decreasing-iou order (rank 1 = greatest
/// overlap); zero-overlap candidates follow in increasing center-distance
/// order. Equal keys break by ascending candidate index. The result is a
/// permutation of 1..M.
std::vector<int> assign_ranks(std::span<const BBox> candidates, const BBox& gt);

/// Multi-instance variant: overlap is the best iou over the ground-truth
/// boxes, distance the smallest center distance.
std::vector<int> assign_ranks(std::span<const BBox> candidates,
                              std::span<const BBox> gts);

}  // namespace annorank
