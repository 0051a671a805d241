#include "prcstomo/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "prcstomo/errors.hpp"

namespace prcstomo {

double wigner_estimate_at(const DecoyWeights& weights, double r) {
  weights.source.validate();
  double value = weights.lambda[0] * prcs_wigner_at(0.0, r);
  for (std::size_t j = 0; j < weights.source.size(); ++j)
    value += weights.lambda[j + 1] * prcs_wigner_at(weights.source.mus[j], r);
  return value;
}

RadialWignerProfile reconstruct_wigner(const DecoyWeights& weights, std::vector<double> r_grid) {
  weights.source.validate();
  if (r_grid.empty()) throw std::domain_error("reconstruct_wigner: empty grid");
  RadialWignerProfile out;
  out.values.resize(r_grid.size());
  for (std::size_t i = 0; i < r_grid.size(); ++i)
    out.values[i] = wigner_estimate_at(weights, r_grid[i]);
  out.r_grid = std::move(r_grid);
  return out;
}

DiagonalFockState reconstruct_density_matrix(const DecoyWeights& weights,
                                             const TruncationPolicy& policy) {
  weights.source.validate();
  const double mu_max = weights.source.mus.back();
  const int k_max = policy.max_photon_number(mu_max);

  DiagonalFockState state;
  state.k_max = k_max;
  state.diag.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  state.diag[0] = weights.lambda[0];
  for (std::size_t j = 0; j < weights.source.size(); ++j) {
    const double mu = weights.source.mus[j];
    double p = std::exp(-mu);
    for (int k = 0; k <= k_max; ++k) {
      state.diag[static_cast<std::size_t>(k)] += weights.lambda[j + 1] * p;
      p *= mu / (k + 1);
    }
  }
  return state;
}

ReconstructionReport quality_metrics(const DiagonalFockState& rho_est) {
  if (rho_est.diag.empty()) throw std::domain_error("quality_metrics: empty state");
  ReconstructionReport report;
  report.k_max = rho_est.k_max;
  report.trace = rho_est.trace();
  report.min_eigenvalue = *std::min_element(rho_est.diag.begin(), rho_est.diag.end());
  report.has_negative_eigenvalue = report.min_eigenvalue < -1e-12;

  double dist2 = 0.0;
  for (std::size_t k = 0; k < rho_est.diag.size(); ++k) {
    const double target = k == 1 ? 1.0 : 0.0;
    const double d = rho_est.diag[k] - target;
    dist2 += d * d;
  }
  if (rho_est.diag.size() < 2) dist2 += 1.0;  // missing |1><1| entry
  report.distance_to_single_photon = std::sqrt(dist2);
  return report;
}

}  // namespace prcstomo
