#pragma once

#include <vector>

#include "prcstomo/decoy_estimator.hpp"

namespace prcstomo {

/// Quality metrics of a reconstructed state against the single photon.
struct ReconstructionReport {
  double trace = 0.0;
  double distance_to_single_photon = 0.0;
  double min_eigenvalue = 0.0;
  bool has_negative_eigenvalue = false;
  int k_max = 0;
};

/// W_est(r) = sum_j lambda_j W_{mu_j}(r) at one radius.
double wigner_estimate_at(const DecoyWeights& weights, double r);

/// Same combination sampled on a radial grid.
RadialWignerProfile reconstruct_wigner(const DecoyWeights& weights, std::vector<double> r_grid);

/// Diagonal of the reconstructed density matrix,
///   diag[k] = lambda_0 delta_{k0} + sum_j lambda_j P_{mu_j}(k),
/// truncated at K(max mu). Diagonal inputs keep the result diagonal, so
/// eigenvalues are the entries themselves.
DiagonalFockState reconstruct_density_matrix(const DecoyWeights& weights,
                                             const TruncationPolicy& policy = {});

/// Trace, trace-norm distance to |1><1| and eigenvalue sign summary.
ReconstructionReport quality_metrics(const DiagonalFockState& rho_est);

}  // namespace prcstomo
