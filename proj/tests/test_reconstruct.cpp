#include "prcstomo/reconstruct.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "prcstomo/errors.hpp"
#include "stat_utils.hpp"

using namespace prcstomo;

namespace {

constexpr double kPi = std::numbers::pi;

DecoyWeights weights_for(std::vector<double> mus) {
  MeanPhotonSet set;
  set.mus = std::move(mus);
  return decoy_weights(set);
}

const std::vector<double> kReferenceSet = {0.178, 0.436, 2.2};

}  // namespace

TEST_CASE("wigner estimate at the origin, single decoy state") {
  const DecoyWeights w = weights_for({0.178});
  const double expected = (2.0 / kPi) * (std::exp(-0.178) - 1.0) / 0.178;
  CHECK(wigner_estimate_at(w, 0.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(wigner_estimate_at(w, 0.0) == doctest::Approx(-0.5832).epsilon(2e-4));
  // an upper bound of the exact central negativity -2/pi
  CHECK(wigner_estimate_at(w, 0.0) > -2.0 / kPi);
}

TEST_CASE("wigner reconstruction improves with more decoy states") {
  const auto r_grid = uniform_grid(0.0, 3.0, 0.005);
  auto max_error = [&](const std::vector<double>& mus) {
    const RadialWignerProfile est = reconstruct_wigner(weights_for(mus), r_grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < r_grid.size(); ++i)
      worst = std::max(worst, std::abs(est.values[i] - single_photon_wigner_at(r_grid[i])));
    return worst;
  };
  CHECK(max_error(kReferenceSet) < max_error({0.178}));
}

TEST_CASE("reconstructed density matrix reproduces the regression metrics") {
  const ReconstructionReport r1 = quality_metrics(reconstruct_density_matrix(weights_for({0.178})));
  CHECK(r1.trace == doctest::Approx((std::exp(0.178) - 1.0) / 0.178).epsilon(1e-12));
  CHECK(std::abs(r1.trace - 1.095) < 2e-3);
  CHECK(std::abs(r1.distance_to_single_photon - 8.9e-2) < 2e-3);
  CHECK_FALSE(r1.has_negative_eigenvalue);

  const ReconstructionReport r2 =
      quality_metrics(reconstruct_density_matrix(weights_for({0.178, 0.436})));
  CHECK(std::abs(r2.trace - 0.985) < 2e-3);
  CHECK(std::abs(r2.distance_to_single_photon - 1.3e-2) < 2e-3);
  CHECK(r2.has_negative_eigenvalue);

  const ReconstructionReport r3 = quality_metrics(reconstruct_density_matrix(weights_for(kReferenceSet)));
  CHECK(std::abs(r3.trace - 1.013) < 2e-3);
  CHECK(std::abs(r3.distance_to_single_photon - 8.3e-3) < 2e-3);
  CHECK(r3.min_eigenvalue >= -1e-12);
  CHECK_FALSE(r3.has_negative_eigenvalue);

  // monotone improvement
  CHECK(r2.distance_to_single_photon < r1.distance_to_single_photon);
  CHECK(r3.distance_to_single_photon < r2.distance_to_single_photon);

  // triangle bound on the trace-norm metric
  for (const ReconstructionReport* r : {&r1, &r2, &r3}) {
    CHECK(r->distance_to_single_photon >= 0.0);
    CHECK(r->distance_to_single_photon <= r->trace + 1.0);
  }
}

TEST_CASE("quality_metrics on exact Fock states") {
  DiagonalFockState one;
  one.diag = {0.0, 1.0, 0.0};
  one.k_max = 2;
  const ReconstructionReport exact = quality_metrics(one);
  CHECK(exact.distance_to_single_photon == 0.0);
  CHECK(exact.trace == 1.0);
  CHECK_FALSE(exact.has_negative_eigenvalue);

  DiagonalFockState zero;
  zero.diag = {1.0, 0.0};
  zero.k_max = 1;
  CHECK(quality_metrics(zero).distance_to_single_photon ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("trace linearity: trace(rho_est) equals the weight sum") {
  for (auto mus : {std::vector<double>{0.178}, std::vector<double>{0.178, 0.436}, kReferenceSet}) {
    const DecoyWeights w = weights_for(mus);
    const DiagonalFockState rho = reconstruct_density_matrix(w);
    CHECK(std::abs(rho.trace() - w.sum()) < 1e-10);
  }
}

TEST_CASE("marginal from rho_est equals the direct Y1 estimate") {
  const auto grid = uniform_grid(-3.0, 3.0, 0.01);
  const DecoyWeights w = weights_for(kReferenceSet);
  const DiagonalFockState rho = reconstruct_density_matrix(w);

  const MarginalDensity vacuum = prcs_marginal(0.0, grid);
  std::vector<MarginalDensity> curves;
  for (double mu : kReferenceSet) curves.push_back(prcs_marginal(mu, grid));
  const EstimatedDensity direct = estimate_y1(w, vacuum, curves);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    double from_rho = 0.0;
    for (std::size_t k = 0; k < rho.diag.size(); ++k)
      from_rho += rho.diag[k] * fock_quadrature_density(static_cast<int>(k), grid[i]);
    CHECK(std::abs(from_rho - direct.values[i]) < 1e-8);
  }
}

TEST_CASE("p-integrated Wigner estimate equals the Y1 estimate") {
  const DecoyWeights w = weights_for(kReferenceSet);
  const auto grid = uniform_grid(-3.0, 3.0, 0.05);
  const MarginalDensity vacuum = prcs_marginal(0.0, grid);
  std::vector<MarginalDensity> curves;
  for (double mu : kReferenceSet) curves.push_back(prcs_marginal(mu, grid));
  const EstimatedDensity direct = estimate_y1(w, vacuum, curves);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    const double integral = testutil::simpson(
        [&](double p) { return wigner_estimate_at(w, std::sqrt(x * x + p * p)); }, -6.0, 6.0,
        1200);
    CHECK(std::abs(integral - direct.values[i]) < 1e-4);
  }
}

TEST_CASE("reconstruct rejects invalid weights") {
  DecoyWeights empty;
  CHECK_THROWS_AS(reconstruct_density_matrix(empty), std::domain_error);
  CHECK_THROWS_AS(wigner_estimate_at(empty, 0.0), std::domain_error);
  DiagonalFockState none;
  CHECK_THROWS_AS(quality_metrics(none), std::domain_error);
}
