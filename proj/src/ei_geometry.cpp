#include "vanbo/ei_geometry.hpp"

#include <cmath>
#include <limits>

#include "vanbo/normal.hpp"

namespace vanbo {

namespace {

void check_rho_yhat(double rho, double yhat) {
  if (!(rho >= 0.0) || rho >= 1.0) {
    throw ContractViolation("ei_of_rho: rho must lie in [0, 1)");
  }
  if (!(yhat > 0.0)) throw ContractViolation("ei_of_rho: yhat must be positive");
}

// sqrt(1 - rho^2) without cancellation near rho = 1.
double sigma_of_rho(double rho) { return std::sqrt((1.0 - rho) * (1.0 + rho)); }

}  // namespace

double ei_of_rho(double rho, double yhat) {
  check_rho_yhat(rho, yhat);
  const double sigma = sigma_of_rho(rho);
  const double z = yhat * (rho - 1.0) / sigma;
  // sigma * h(z) through the stable log branch; exact zero only in the limit.
  return sigma * std::exp(detail::log_h(z));
}

double dei_drho(double rho, double yhat) {
  check_rho_yhat(rho, yhat);
  const double sigma = sigma_of_rho(rho);
  const double z = yhat * (rho - 1.0) / sigma;
  return yhat * normal_cdf(z) - rho / sigma * normal_pdf(z);
}

double rho_lower_bound(double yhat) {
  if (!(yhat > 0.0)) throw ContractViolation("rho_lower_bound: yhat must be positive");
  // g(rho) = rho sqrt((1+rho)/(1-rho)) is strictly increasing from 0 to inf.
  double lo = 0.0;
  double hi = 1.0 - 1e-16;
  const auto g = [](double rho) {
    return rho * std::sqrt((1.0 + rho) / (1.0 - rho));
  };
  if (g(hi) < yhat) return hi;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < yhat ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double rho_star_numeric(double yhat) {
  if (!(yhat > 0.0)) throw ContractViolation("rho_star_numeric: yhat must be positive");
  constexpr int kGrid = 4096;
  constexpr double kRhoMax = 1.0 - 1e-6;
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double rho = kRhoMax * i / (kGrid - 1);
    const double value = ei_of_rho(rho, yhat);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  // Golden-section refinement between the grid neighbors of the argmax.
  double lo = kRhoMax * std::max(0, best - 1) / (kGrid - 1);
  double hi = kRhoMax * std::min(kGrid - 1, best + 1) / (kGrid - 1);
  constexpr double kInvPhi = 0.61803398874989484820458683437;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = ei_of_rho(x1, yhat);
  double f2 = ei_of_rho(x2, yhat);
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = ei_of_rho(x2, yhat);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = ei_of_rho(x1, yhat);
    }
  }
  return 0.5 * (lo + hi);
}

RhoProfile rho_profile(double yhat, int grid_points) {
  if (grid_points < 2) throw ContractViolation("rho_profile: need at least two grid points");
  RhoProfile profile;
  profile.yhat = yhat;
  profile.rho_grid.reserve(static_cast<std::size_t>(grid_points));
  profile.ei_values.reserve(static_cast<std::size_t>(grid_points));
  profile.derivative_values.reserve(static_cast<std::size_t>(grid_points));
  constexpr double kRhoMax = 1.0 - 1e-6;
  for (int i = 0; i < grid_points; ++i) {
    const double rho = kRhoMax * i / (grid_points - 1);
    profile.rho_grid.push_back(rho);
    profile.ei_values.push_back(ei_of_rho(rho, yhat));
    profile.derivative_values.push_back(dei_drho(rho, yhat));
  }
  profile.rho_star = rho_star_numeric(yhat);
  profile.rho_bound = rho_lower_bound(yhat);
  return profile;
}

LocalityReport locality_report(const RunHistory& history) {
  if (history.records.empty()) throw ContractViolation("locality_report: empty history");
  LocalityReport report;
  const auto& records = history.records;
  for (std::size_t i = 1; i < records.size(); ++i) {
    std::size_t best = 0;
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < i; ++j) {
      if (records[j].observed > records[best].observed) best = j;
      min_dist = std::min(min_dist, (records[i].point - records[j].point).norm());
    }
    report.iteration.push_back(static_cast<int>(i));
    report.distance_to_incumbent.push_back((records[i].point - records[best].point).norm());
    report.min_distance_to_data.push_back(min_dist);
  }
  return report;
}

}  // namespace vanbo
