#pragma once

#include "annorank/types.hpp"

#include <functional>
#include <vector>

namespace annorank {

struct MinimizeOptions {
  int max_iterations = 1000;
  /// Stop when ||g|| <= gradient_tolerance * (1 + |f|).
  double gradient_tolerance = 1e-6;
  /// Stop when an accepted step decreases f by less than
  /// rel_objective_tolerance * max(1, |f|).
  double rel_objective_tolerance = 1e-12;
  int history = 10;
  /// When set, receives the objective value at every accepted iterate,
  /// starting with the initial point.
  std::vector<double>* objective_trace = nullptr;
};

struct MinimizeResult {
  Vector x;
  double objective = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
};

/// Objective callback: writes the gradient at x into `grad` and returns f(x).
using ValueAndGradient = std::function<double(const Vector& x, Vector& grad)>;

/// L-BFGS with Armijo backtracking. Accepted steps never increase the
/// objective. Throws NonFiniteError when the objective or gradient stops
/// being finite.
MinimizeResult minimize(const ValueAndGradient& fn, Vector x0,
                        const MinimizeOptions& opts = {});

}  // namespace annorank
