#pragma once

#include <utility>
#include <vector>

#include "prcstomo/grid.hpp"

namespace prcstomo {

/// Fock-space truncation rule for Poisson mixtures. The cutoff K(mu) is the
/// smallest K >= k_min_cap whose excluded tail mass sum_{k>K} P_mu(k) falls
/// below tail_tolerance; it is monotone non-decreasing in mu.
struct TruncationPolicy {
  double tail_tolerance = 1e-10;
  int k_min_cap = 20;

  int max_photon_number(double mu) const;
};

/// Probability density of quadrature outcomes on a uniform x grid.
/// Quadrature convention throughout: the vacuum variance is 1/4.
struct MarginalDensity {
  std::vector<double> x_grid;
  std::vector<double> values;
  double grid_step = 0.0;
};

/// Rotationally symmetric Wigner function on a radial grid starting at 0.
struct RadialWignerProfile {
  std::vector<double> r_grid;
  std::vector<double> values;
};

/// Truncated Fock-basis density matrix diagonal. Physical states have
/// diag >= 0 and trace within the truncation tail of 1; reconstructed
/// estimates may violate both and are stored as-is.
struct DiagonalFockState {
  std::vector<double> diag;
  int k_max = 0;

  double trace() const;
};

/// P_mu(k) = mu^k e^{-mu} / k!, evaluated in log space so large k neither
/// overflows nor loses the exponential.
double poisson_weight(double mu, int k);

/// |psi_k(x)|^2 for the orthonormal oscillator eigenfunction
///   psi_k(x) = (2/pi)^{1/4} (2^k k!)^{-1/2} H_k(sqrt(2) x) e^{-x^2},
/// evaluated through the stable recurrence
///   psi_{k+1} = (2 x psi_k - sqrt(k) psi_{k-1}) / sqrt(k+1)
/// which keeps every intermediate bounded (no factorials, no overflow).
double fock_quadrature_density(int k, double x);

/// X_mu(x) = sum_{k<=K(mu)} P_mu(k) |psi_k(x)|^2 at a single point.
double prcs_marginal_at(double mu, double x, const TruncationPolicy& policy = {});

/// X_mu sampled on a grid; even in x and normalized up to the truncation
/// tail plus grid quadrature error.
MarginalDensity prcs_marginal(double mu, std::vector<double> x_grid,
                              const TruncationPolicy& policy = {});

/// W_mu(r) = (2/pi) e^{-2(r^2+mu)} I0(4 r sqrt(mu)). Computed as
/// (2/pi) e^{-2 (r - sqrt(mu))^2} * i0e(4 r sqrt(mu)) with the
/// exponentially scaled Bessel function, finite for r sqrt(mu) up to 1e3
/// and beyond.
double prcs_wigner_at(double mu, double r);

RadialWignerProfile prcs_wigner_radial(double mu, std::vector<double> r_grid);

/// Poisson diagonal of the phase-averaged coherent state, k = 0..K(mu).
DiagonalFockState prcs_density_matrix(double mu, const TruncationPolicy& policy = {});

/// Exact single-photon marginal Y1(x) = 4 sqrt(2/pi) x^2 e^{-2x^2}.
double single_photon_marginal_at(double x);

/// Exact single-photon Wigner function W1(r) = (2/pi)(4r^2 - 1) e^{-2r^2}.
double single_photon_wigner_at(double r);

/// Ground-truth single-photon curves on the given grids.
std::pair<MarginalDensity, RadialWignerProfile> single_photon_references(
    std::vector<double> x_grid, std::vector<double> r_grid);

/// e^{-|x|} I0(x): all-positive power series below 15, asymptotic expansion
/// above; relative accuracy well under 1e-9 on both branches.
double bessel_i0_scaled(double x);

}  // namespace prcstomo
