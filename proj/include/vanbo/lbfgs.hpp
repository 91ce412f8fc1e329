#pragma once

#include <functional>
#include <limits>

#include "vanbo/types.hpp"

namespace vanbo {

/// Objective for minimization: fills `gradient` and returns the value.
using ObjectiveWithGradient = std::function<double(const Vector& x, Vector& gradient)>;

struct LbfgsOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;  // on the projected gradient, inf-norm
  int history = 8;
  int max_line_search_steps = 30;
};

struct LbfgsResult {
  Vector x;
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

/// Limited-memory quasi-Newton minimization with bound clamping: search
/// directions from the standard two-loop recursion, iterates projected onto
/// [lower, upper] inside a backtracking Armijo line search. Bounds may be
/// +/-infinity for unconstrained coordinates. Non-finite trial values are
/// treated as rejected steps.
LbfgsResult lbfgs_minimize(const ObjectiveWithGradient& objective, const Vector& x0,
                           const Vector& lower, const Vector& upper,
                           const LbfgsOptions& options = {});

/// Unconstrained convenience overload.
LbfgsResult lbfgs_minimize(const ObjectiveWithGradient& objective, const Vector& x0,
                           const LbfgsOptions& options = {});

}  // namespace vanbo
