#pragma once

#include <vector>

#include "vanbo/bo.hpp"
#include "vanbo/types.hpp"

namespace vanbo {

// Expected improvement parametrized by the correlation rho between a
// candidate and the incumbent, for an otherwise uninformed model
// (K = sigma_f^2 I, data scaled to c = 0, sigma_f = 1):
//   EI(rho) = (rho - 1) yhat Phi(Z) + sqrt(1 - rho^2) phi(Z),
//   Z = yhat (rho - 1) / sqrt(1 - rho^2),
// with yhat = (y_max - c) / sigma_f > 0.

double ei_of_rho(double rho, double yhat);

/// d EI / d rho = yhat Phi(Z) - rho / sqrt(1 - rho^2) phi(Z).
double dei_drho(double rho, double yhat);

/// Unique root of g(rho) = rho sqrt((1 + rho)/(1 - rho)) - yhat on [0, 1);
/// EI(rho) is strictly increasing below it, so the EI argmax lies above.
/// Bisection to absolute tolerance 1e-10.
double rho_lower_bound(double yhat);

/// Numerical argmax of ei_of_rho: dense grid on [0, 1 - 1e-6] refined by
/// golden-section search.
double rho_star_numeric(double yhat);

struct RhoProfile {
  double yhat = 0.0;
  std::vector<double> rho_grid;
  std::vector<double> ei_values;
  std::vector<double> derivative_values;
  double rho_star = 0.0;
  double rho_bound = 0.0;
};

RhoProfile rho_profile(double yhat, int grid_points = 4096);

/// Per-evaluation locality diagnostics recomputed from a run history:
/// Euclidean distance to the incumbent before the query, and minimum
/// distance to any earlier point. Entry i describes evaluation i (the first
/// evaluation has no predecessors and is skipped).
struct LocalityReport {
  std::vector<int> iteration;  // evaluation indices, starting at 1
  std::vector<double> distance_to_incumbent;
  std::vector<double> min_distance_to_data;
};

LocalityReport locality_report(const RunHistory& history);

}  // namespace vanbo
