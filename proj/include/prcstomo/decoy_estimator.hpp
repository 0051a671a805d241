#pragma once

#include <cstddef>
#include <vector>

#include "prcstomo/quantum_math.hpp"

namespace prcstomo {

/// Non-zero mean photon numbers entering a decoy estimate, strictly
/// ascending, with optional 1-sigma uncertainties (empty = all zero).
/// Pairs closer than separation_floor make the inversion ill-conditioned
/// and are rejected.
struct MeanPhotonSet {
  std::vector<double> mus;
  std::vector<double> sigmas;
  double separation_floor = 1e-3;

  std::size_t size() const { return mus.size(); }
  void validate() const;
};

/// Inversion coefficients lambda_0..lambda_L; lambda[0] weights the vacuum
/// curve and is always negative, the others alternate in sign starting
/// positive at the smallest mu.
struct DecoyWeights {
  std::vector<double> lambda;
  MeanPhotonSet source;

  double sum() const;
};

/// Estimated single-photon quadrature density. Values may dip below zero
/// (the linear inversion does not enforce physicality); sigma_values carry
/// the propagated 1-sigma uncertainty per grid point.
struct EstimatedDensity {
  std::vector<double> x_grid;
  std::vector<double> values;
  std::vector<double> sigma_values;
  double grid_step = 0.0;
};

DecoyWeights decoy_weights(const MeanPhotonSet& set);

/// Y1 estimate: lambda_0 X_0(x) + sum_j lambda_j X_{mu_j}(x) on the shared
/// grid. Curve order must match the mu order of weights.source.
EstimatedDensity estimate_y1(const DecoyWeights& weights, const MarginalDensity& vacuum,
                             const std::vector<MarginalDensity>& curves);

/// First-order uncertainty of the Y1 estimate per grid point:
///   sigma^2(x) = sum_j lambda_j^2 X_j(x)/(N_j dx)            (Poisson bins)
///              + sum_j (dY/dmu_j)^2 sigma_mu_j^2             (mu fits)
/// with dY/dmu_j from central finite differences of the lambda
/// coefficients (step 1e-6 mu_j). histogram_counts are per channel, vacuum
/// first; +infinity marks an exact noise-free curve.
std::vector<double> propagate_errors(const DecoyWeights& weights,
                                     const MarginalDensity& vacuum,
                                     const std::vector<MarginalDensity>& curves,
                                     const std::vector<double>& mu_sigmas,
                                     const std::vector<double>& histogram_counts);

}  // namespace prcstomo
