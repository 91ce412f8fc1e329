#include "vanbo/lbfgs.hpp"

#include <cmath>
#include <deque>

namespace vanbo {

namespace {

Vector clamp_to_box(const Vector& x, const Vector& lower, const Vector& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// Inf-norm of the projected gradient step; zero at a box-constrained stationary point.
double projected_gradient_norm(const Vector& x, const Vector& gradient, const Vector& lower,
                               const Vector& upper) {
  const Vector stepped = clamp_to_box(x - gradient, lower, upper);
  return (stepped - x).lpNorm<Eigen::Infinity>();
}

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveWithGradient& objective, const Vector& x0,
                           const Vector& lower, const Vector& upper,
                           const LbfgsOptions& options) {
  const Eigen::Index n = x0.size();
  LbfgsResult result;
  result.x = clamp_to_box(x0, lower, upper);

  Vector gradient(n);
  double value = objective(result.x, gradient);
  ++result.evaluations;
  if (!std::isfinite(value)) {
    result.value = value;
    return result;
  }
  result.value = value;

  std::deque<Vector> s_history;
  std::deque<Vector> y_history;
  std::deque<double> rho_history;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter;
    if (projected_gradient_norm(result.x, gradient, lower, upper) <=
        options.gradient_tolerance) {
      result.converged = true;
      return result;
    }

    // Two-loop recursion.
    Vector direction = -gradient;
    const int m = static_cast<int>(s_history.size());
    std::vector<double> alpha(static_cast<std::size_t>(m));
    for (int i = m - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] = rho_history[static_cast<std::size_t>(i)] *
                                           s_history[static_cast<std::size_t>(i)].dot(direction);
      direction -= alpha[static_cast<std::size_t>(i)] * y_history[static_cast<std::size_t>(i)];
    }
    if (m > 0) {
      const Vector& s_last = s_history.back();
      const Vector& y_last = y_history.back();
      direction *= s_last.dot(y_last) / y_last.squaredNorm();
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho_history[static_cast<std::size_t>(i)] *
                          y_history[static_cast<std::size_t>(i)].dot(direction);
      direction += (alpha[static_cast<std::size_t>(i)] - beta) *
                   s_history[static_cast<std::size_t>(i)];
    }
    if (direction.dot(gradient) >= 0.0) direction = -gradient;  // safeguard

    // Backtracking Armijo line search on the projected path.
    double step = 1.0;
    const double armijo = 1e-4;
    Vector x_new;
    Vector gradient_new(n);
    double value_new = value;
    bool accepted = false;
    for (int ls = 0; ls < options.max_line_search_steps; ++ls) {
      x_new = clamp_to_box(result.x + step * direction, lower, upper);
      const Vector actual_step = x_new - result.x;
      if (actual_step.lpNorm<Eigen::Infinity>() == 0.0) break;
      value_new = objective(x_new, gradient_new);
      ++result.evaluations;
      if (std::isfinite(value_new) &&
          value_new <= value + armijo * gradient.dot(actual_step)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No admissible step along this direction; treat as converged-in-place.
      return result;
    }

    const Vector s = x_new - result.x;
    const Vector y = gradient_new - gradient;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      s_history.push_back(s);
      y_history.push_back(y);
      rho_history.push_back(1.0 / sy);
      if (static_cast<int>(s_history.size()) > options.history) {
        s_history.pop_front();
        y_history.pop_front();
        rho_history.pop_front();
      }
    }
    result.x = x_new;
    value = value_new;
    result.value = value_new;
    gradient = gradient_new;
  }
  result.converged = projected_gradient_norm(result.x, gradient, lower, upper) <=
                     options.gradient_tolerance;
  return result;
}

LbfgsResult lbfgs_minimize(const ObjectiveWithGradient& objective, const Vector& x0,
                           const LbfgsOptions& options) {
  const double inf = std::numeric_limits<double>::infinity();
  return lbfgs_minimize(objective, x0, Vector::Constant(x0.size(), -inf),
                        Vector::Constant(x0.size(), inf), options);
}

}  // namespace vanbo
