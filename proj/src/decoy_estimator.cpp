#include "prcstomo/decoy_estimator.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "prcstomo/errors.hpp"

namespace prcstomo {

namespace {

// lambda vector for a validated, ascending mu list.
std::vector<double> lambda_coefficients(const std::vector<double>& mus) {
  const std::size_t L = mus.size();
  double product = 1.0;
  for (double mu : mus) product *= mu;

  std::vector<double> lambda(L + 1, 0.0);
  for (std::size_t j = 0; j < L; ++j) {
    double denom = 1.0;
    for (std::size_t n = 0; n < L; ++n) {
      if (n != j) denom *= mus[n] - mus[j];
    }
    const double base = product / (mus[j] * mus[j] * denom);
    lambda[0] -= base;
    lambda[j + 1] = base * std::exp(mus[j]);
  }
  return lambda;
}

void check_alignment(const DecoyWeights& weights, const MarginalDensity& vacuum,
                     const std::vector<MarginalDensity>& curves) {
  if (curves.size() != weights.source.size())
    throw ValidationError("estimate_y1: curve count does not match the mu set");
  if (weights.lambda.size() != curves.size() + 1)
    throw ValidationError("estimate_y1: weight vector is inconsistent with the mu set");
  for (const MarginalDensity& curve : curves) {
    if (!same_grid(vacuum.x_grid, curve.x_grid))
      throw ValidationError("estimate_y1: curves do not share the vacuum x grid");
  }
}

}  // namespace

void MeanPhotonSet::validate() const {
  if (mus.empty()) throw std::domain_error("MeanPhotonSet: at least one mu is required");
  if (!sigmas.empty() && sigmas.size() != mus.size())
    throw ValidationError("MeanPhotonSet: sigmas must be empty or match mus in length");
  for (double mu : mus) {
    if (!(mu > 0.0) || !std::isfinite(mu))
      throw std::domain_error("MeanPhotonSet: every mu must be finite and > 0");
  }
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw std::domain_error("MeanPhotonSet: sigmas must be >= 0");
  }
  for (std::size_t i = 1; i < mus.size(); ++i) {
    if (!(mus[i] > mus[i - 1]))
      throw ValidationError("MeanPhotonSet: mus must be strictly ascending");
    if (mus[i] - mus[i - 1] < separation_floor)
      throw IllConditionedError("MeanPhotonSet: mu gap " + std::to_string(mus[i] - mus[i - 1]) +
                                " below separation floor " + std::to_string(separation_floor));
  }
}

double DecoyWeights::sum() const {
  double total = 0.0;
  for (double l : lambda) total += l;
  return total;
}

DecoyWeights decoy_weights(const MeanPhotonSet& set) {
  set.validate();
  DecoyWeights weights;
  weights.lambda = lambda_coefficients(set.mus);
  weights.source = set;
  return weights;
}

EstimatedDensity estimate_y1(const DecoyWeights& weights, const MarginalDensity& vacuum,
                             const std::vector<MarginalDensity>& curves) {
  check_alignment(weights, vacuum, curves);

  EstimatedDensity out;
  out.x_grid = vacuum.x_grid;
  out.grid_step = vacuum.grid_step;
  out.values.resize(vacuum.values.size());
  out.sigma_values.assign(vacuum.values.size(), 0.0);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    double v = weights.lambda[0] * vacuum.values[i];
    for (std::size_t j = 0; j < curves.size(); ++j)
      v += weights.lambda[j + 1] * curves[j].values[i];
    out.values[i] = v;
  }
  return out;
}

std::vector<double> propagate_errors(const DecoyWeights& weights,
                                     const MarginalDensity& vacuum,
                                     const std::vector<MarginalDensity>& curves,
                                     const std::vector<double>& mu_sigmas,
                                     const std::vector<double>& histogram_counts) {
  check_alignment(weights, vacuum, curves);
  const std::size_t L = weights.source.size();
  if (mu_sigmas.size() != L)
    throw ValidationError("propagate_errors: need one mu sigma per non-zero channel");
  if (histogram_counts.size() != L + 1)
    throw ValidationError("propagate_errors: need one sample count per channel, vacuum first");
  for (double n : histogram_counts) {
    if (!(n > 0.0))
      throw std::domain_error("propagate_errors: sample counts must be positive (inf = exact)");
  }
  for (double s : mu_sigmas) {
    if (!(s >= 0.0)) throw std::domain_error("propagate_errors: mu sigmas must be >= 0");
  }

  const double dx = vacuum.grid_step;
  const std::size_t n_points = vacuum.values.size();

  // d lambda_i / d mu_j by central differences; the measured curves stay
  // fixed, only the inversion coefficients move with the fitted mu.
  std::vector<std::vector<double>> dlambda(L);
  for (std::size_t j = 0; j < L; ++j) {
    const double h = 1e-6 * weights.source.mus[j];
    std::vector<double> up = weights.source.mus;
    std::vector<double> down = weights.source.mus;
    up[j] += h;
    down[j] -= h;
    const std::vector<double> lp = lambda_coefficients(up);
    const std::vector<double> lm = lambda_coefficients(down);
    dlambda[j].resize(L + 1);
    for (std::size_t i = 0; i <= L; ++i) dlambda[j][i] = (lp[i] - lm[i]) / (2.0 * h);
  }

  std::vector<double> sigma(n_points, 0.0);
  for (std::size_t i = 0; i < n_points; ++i) {
    double var = 0.0;
    for (std::size_t j = 0; j <= L; ++j) {
      const double n = histogram_counts[j];
      if (std::isinf(n)) continue;
      const double x_val = j == 0 ? vacuum.values[i] : curves[j - 1].values[i];
      var += weights.lambda[j] * weights.lambda[j] * x_val / (n * dx);
    }
    for (std::size_t j = 0; j < L; ++j) {
      double dy = dlambda[j][0] * vacuum.values[i];
      for (std::size_t c = 0; c < L; ++c) dy += dlambda[j][c + 1] * curves[c].values[i];
      var += dy * dy * mu_sigmas[j] * mu_sigmas[j];
    }
    sigma[i] = std::sqrt(var);
  }
  return sigma;
}

}  // namespace prcstomo
