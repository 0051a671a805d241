#include "prcstomo/quantum_math.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>

#include "prcstomo/errors.hpp"

namespace prcstomo {

namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;

void require_nonnegative_mu(double mu, const char* who) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::domain_error(std::string(who) + ": mu must be finite and >= 0");
}

// Poisson weights P_mu(0..k_max) by the forward ratio p_{k+1} = p_k mu/(k+1).
std::vector<double> poisson_weights_upto(double mu, int k_max) {
  std::vector<double> p(static_cast<std::size_t>(k_max) + 1);
  p[0] = std::exp(-mu);
  for (int k = 0; k < k_max; ++k) p[k + 1] = p[k] * mu / (k + 1);
  return p;
}

}  // namespace

int TruncationPolicy::max_photon_number(double mu) const {
  require_nonnegative_mu(mu, "TruncationPolicy");
  if (!(tail_tolerance > 0.0) || !(tail_tolerance < 1.0))
    throw ValidationError("TruncationPolicy: tail_tolerance must lie in (0, 1)");
  if (k_min_cap < 0) throw ValidationError("TruncationPolicy: k_min_cap must be >= 0");

  long double cdf = 0.0L;
  long double term = std::exp(-static_cast<long double>(mu));
  for (int k = 0;; ++k) {
    cdf += term;
    if (k >= k_min_cap && 1.0L - cdf < static_cast<long double>(tail_tolerance)) return k;
    if (k > 100000) throw NumericError("TruncationPolicy: truncation order did not converge");
    term *= mu / (k + 1);
  }
}

double DiagonalFockState::trace() const {
  double sum = 0.0;
  for (double d : diag) sum += d;
  return sum;
}

double poisson_weight(double mu, int k) {
  require_nonnegative_mu(mu, "poisson_weight");
  if (k < 0) throw std::domain_error("poisson_weight: k must be >= 0");
  if (mu == 0.0) return k == 0 ? 1.0 : 0.0;
  if (k == 0) return std::exp(-mu);
  return std::exp(k * std::log(mu) - mu - std::lgamma(static_cast<double>(k) + 1.0));
}

double fock_quadrature_density(int k, double x) {
  if (k < 0) throw std::domain_error("fock_quadrature_density: k must be >= 0");
  double prev = 0.0;
  double cur = std::pow(kTwoOverPi, 0.25) * std::exp(-x * x);
  for (int j = 0; j < k; ++j) {
    const double next = (2.0 * x * cur - std::sqrt(static_cast<double>(j)) * prev) /
                        std::sqrt(static_cast<double>(j) + 1.0);
    prev = cur;
    cur = next;
  }
  return cur * cur;
}

double prcs_marginal_at(double mu, double x, const TruncationPolicy& policy) {
  require_nonnegative_mu(mu, "prcs_marginal");
  const int k_max = policy.max_photon_number(mu);
  const std::vector<double> p = poisson_weights_upto(mu, k_max);

  double sum = 0.0;
  double prev = 0.0;
  double cur = std::pow(kTwoOverPi, 0.25) * std::exp(-x * x);
  for (int k = 0; k <= k_max; ++k) {
    sum += p[static_cast<std::size_t>(k)] * cur * cur;
    const double next = (2.0 * x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                        std::sqrt(static_cast<double>(k) + 1.0);
    prev = cur;
    cur = next;
  }
  return sum;
}

MarginalDensity prcs_marginal(double mu, std::vector<double> x_grid,
                              const TruncationPolicy& policy) {
  require_nonnegative_mu(mu, "prcs_marginal");
  if (x_grid.empty()) throw std::domain_error("prcs_marginal: empty grid");
  const double step = grid_step_of(x_grid);

  const int k_max = policy.max_photon_number(mu);
  const std::vector<double> p = poisson_weights_upto(mu, k_max);

  MarginalDensity out;
  out.grid_step = step;
  out.values.resize(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double x = x_grid[i];
    double sum = 0.0;
    double prev = 0.0;
    double cur = std::pow(kTwoOverPi, 0.25) * std::exp(-x * x);
    for (int k = 0; k <= k_max; ++k) {
      sum += p[static_cast<std::size_t>(k)] * cur * cur;
      const double next = (2.0 * x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                          std::sqrt(static_cast<double>(k) + 1.0);
      prev = cur;
      cur = next;
    }
    out.values[i] = sum;
  }
  out.x_grid = std::move(x_grid);
  return out;
}

double bessel_i0_scaled(double x) {
  x = std::abs(x);
  if (x < 15.0) {
    // I0 power series: every term positive, no cancellation; the sum stays
    // below e^15 so scaling afterwards is safe.
    const double q = 0.25 * x * x;
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 64; ++k) {
      term *= q / (static_cast<double>(k) * static_cast<double>(k));
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return std::exp(-x) * sum;
  }
  // Asymptotic expansion i0e(x) ~ (2 pi x)^{-1/2} sum_k a_k x^{-k} with
  // a_k = a_{k-1} (2k-1)^2 / (8k); truncated at the smallest term.
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k <= 24; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * odd * odd / (8.0 * k * x);
    if (next >= term) break;
    term = next;
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

double prcs_wigner_at(double mu, double r) {
  require_nonnegative_mu(mu, "prcs_wigner");
  if (!(r >= 0.0)) throw std::domain_error("prcs_wigner: radius must be >= 0");
  const double root_mu = std::sqrt(mu);
  const double d = r - root_mu;
  return kTwoOverPi * std::exp(-2.0 * d * d) * bessel_i0_scaled(4.0 * r * root_mu);
}

RadialWignerProfile prcs_wigner_radial(double mu, std::vector<double> r_grid) {
  require_nonnegative_mu(mu, "prcs_wigner_radial");
  if (r_grid.empty()) throw std::domain_error("prcs_wigner_radial: empty grid");
  if (r_grid.front() != 0.0)
    throw std::domain_error("prcs_wigner_radial: radial grid must start at 0");
  RadialWignerProfile out;
  out.values.resize(r_grid.size());
  for (std::size_t i = 0; i < r_grid.size(); ++i) out.values[i] = prcs_wigner_at(mu, r_grid[i]);
  out.r_grid = std::move(r_grid);
  return out;
}

DiagonalFockState prcs_density_matrix(double mu, const TruncationPolicy& policy) {
  require_nonnegative_mu(mu, "prcs_density_matrix");
  const int k_max = policy.max_photon_number(mu);
  DiagonalFockState state;
  state.k_max = k_max;
  state.diag = poisson_weights_upto(mu, k_max);
  return state;
}

double single_photon_marginal_at(double x) {
  return 4.0 * std::sqrt(kTwoOverPi) * x * x * std::exp(-2.0 * x * x);
}

double single_photon_wigner_at(double r) {
  return kTwoOverPi * (4.0 * r * r - 1.0) * std::exp(-2.0 * r * r);
}

std::pair<MarginalDensity, RadialWignerProfile> single_photon_references(
    std::vector<double> x_grid, std::vector<double> r_grid) {
  if (x_grid.empty() || r_grid.empty())
    throw std::domain_error("single_photon_references: empty grid");
  MarginalDensity marginal;
  marginal.grid_step = grid_step_of(x_grid);
  marginal.values.resize(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i)
    marginal.values[i] = single_photon_marginal_at(x_grid[i]);
  marginal.x_grid = std::move(x_grid);

  RadialWignerProfile wigner;
  wigner.values.resize(r_grid.size());
  for (std::size_t i = 0; i < r_grid.size(); ++i)
    wigner.values[i] = single_photon_wigner_at(r_grid[i]);
  wigner.r_grid = std::move(r_grid);
  return {std::move(marginal), std::move(wigner)};
}

}  // namespace prcstomo
