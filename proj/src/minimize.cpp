#include "annorank/minimize.hpp"

#include "annorank/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace annorank {

namespace {

constexpr double kArmijoSlope = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr int kMaxBacktracks = 60;

struct Curvature {
  Vector s;
  Vector y;
  double rho;
};

bool all_finite(double f, const Vector& g) {
  return std::isfinite(f) && g.allFinite();
}

// Two-loop recursion: applies the inverse-Hessian estimate built from the
// stored curvature pairs to -g, with gamma = s.y / y.y scaling the seed.
Vector descent_direction(const std::deque<Curvature>& history,
                         const Vector& g) {
  Vector q = -g;
  if (history.empty()) return q;

  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    alpha[i] = history[i].rho * history[i].s.dot(q);
    q -= alpha[i] * history[i].y;
  }
  const Curvature& last = history.back();
  q *= last.s.dot(last.y) / last.y.squaredNorm();
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * history[i].y.dot(q);
    q += (alpha[i] - beta) * history[i].s;
  }
  return q;
}

}  // namespace

MinimizeResult minimize(const ValueAndGradient& fn, Vector x0,
                        const MinimizeOptions& opts) {
  if (opts.max_iterations < 0 || opts.gradient_tolerance <= 0.0 ||
      opts.rel_objective_tolerance <= 0.0 || opts.history < 1) {
    throw ValidationError("minimize: invalid options");
  }

  Vector x = std::move(x0);
  Vector g(x.size());
  double f = fn(x, g);
  if (!all_finite(f, g)) {
    throw NonFiniteError("objective or gradient non-finite at the start");
  }
  if (opts.objective_trace) opts.objective_trace->push_back(f);

  std::deque<Curvature> history;
  int accepted_steps = 0;

  while (accepted_steps < opts.max_iterations) {
    if (g.norm() <= opts.gradient_tolerance * (1.0 + std::abs(f))) break;

    Vector d = descent_direction(history, g);
    double slope = d.dot(g);
    if (!(slope < 0.0)) {
      history.clear();
      d = -g;
      slope = d.dot(g);
      if (!(slope < 0.0)) break;  // gradient numerically zero
    }

    // Armijo backtracking. The first step of a fresh history is scaled to
    // unit length so a steep start cannot overshoot into overflow.
    double step = history.empty() ? std::min(1.0, 1.0 / d.norm()) : 1.0;
    Vector x_new(x.size());
    Vector g_new(x.size());
    double f_new = f;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = x + step * d;
      f_new = fn(x_new, g_new);
      if (!all_finite(f_new, g_new)) {
        throw NonFiniteError("objective or gradient non-finite during a step");
      }
      if (f_new <= f + kArmijoSlope * step * slope) {
        accepted = true;
        break;
      }
      step *= kBacktrack;
    }
    if (!accepted) break;  // no productive step at machine precision

    Vector s = x_new - x;
    Vector y = g_new - g;
    const double sy = s.dot(y);
    // Skip pairs with non-positive curvature so the estimate stays
    // positive definite.
    if (sy > 1e-12 * s.norm() * y.norm()) {
      history.push_back(
          {std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(history.size()) > opts.history) {
        history.pop_front();
      }
    }

    const double decrease = f - f_new;
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    ++accepted_steps;
    if (opts.objective_trace) opts.objective_trace->push_back(f);
    if (decrease < opts.rel_objective_tolerance * std::max(1.0, std::abs(f))) {
      break;
    }
  }

  return {std::move(x), f, g.norm(), accepted_steps};
}

}  // namespace annorank
