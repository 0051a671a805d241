// Acceptance suite: one line per criterion, nonzero exit on any failure.
//
// Covers the reference-table regression (traces, distances, eigenvalue
// signs), the estimator bound parities, a desk-scale statistical
// end-to-end run, the sampler oracle, cross-representation consistency
// and the normalization invariants of the closed-form quantities.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "prcstomo/calibration.hpp"
#include "prcstomo/decoy_estimator.hpp"
#include "prcstomo/reconstruct.hpp"
#include "prcstomo/synth_lab.hpp"

using namespace prcstomo;

namespace {

constexpr double kPi = std::numbers::pi;

int g_failures = 0;

void criterion(int number, const std::string& name, const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string error;
  try {
    body();
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (error.empty()) {
    std::printf("[PASS] criterion %d: %s (%.2fs)\n", number, name.c_str(), seconds);
  } else {
    std::printf("[FAIL] criterion %d: %s (%.2fs) -- %s\n", number, name.c_str(), seconds,
                error.c_str());
    ++g_failures;
  }
  std::fflush(stdout);
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

void require_close(double actual, double expected, double tol, const std::string& what) {
  if (std::abs(actual - expected) > tol)
    throw std::runtime_error(what + ": got " + std::to_string(actual) + ", expected " +
                             std::to_string(expected) + " +- " + std::to_string(tol));
}

void require_runtime(double seconds, double limit, const std::string& what) {
  if (seconds > limit)
    throw std::runtime_error(what + " took " + std::to_string(seconds) + "s, limit " +
                             std::to_string(limit) + "s");
}

double elapsed_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const std::vector<double> kMuSet = {0.178, 0.436, 2.2};

DecoyWeights reference_weights(std::size_t L) {
  MeanPhotonSet set;
  set.mus.assign(kMuSet.begin(), kMuSet.begin() + static_cast<std::ptrdiff_t>(L));
  return decoy_weights(set);
}

// Single-pass deep-truncation marginal, independent of prcs_marginal.
double deep_marginal(double mu, double x, int k_terms) {
  double sum = 0.0;
  double p = std::exp(-mu);
  double prev = 0.0;
  double cur = std::pow(2.0 / kPi, 0.25) * std::exp(-x * x);
  for (int k = 0; k <= k_terms; ++k) {
    sum += p * cur * cur;
    p *= mu / (k + 1);
    const double next =
        (2.0 * x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
    prev = cur;
    cur = next;
  }
  return sum;
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

double chi2_critical_1pct(double dof) {
  const double c = 2.0 / (9.0 * dof);
  const double t = 1.0 - c + 2.3263478740408408 * std::sqrt(c);
  return dof * t * t * t;
}

// -------------------------------------------------------------------------
// criteria 1-3: reference-table regression in theoretical mode

void check_table_traces() {
  const auto start = std::chrono::steady_clock::now();
  const double expected[] = {1.095, 0.985, 1.013};
  for (std::size_t L = 1; L <= 3; ++L) {
    const ReconstructionReport report =
        quality_metrics(reconstruct_density_matrix(reference_weights(L)));
    require_close(report.trace, expected[L - 1], 2e-3, "trace at L=" + std::to_string(L));
  }
  require_runtime(elapsed_since(start), 1.0, "trace column");
}

void check_table_distances() {
  const auto start = std::chrono::steady_clock::now();
  const double expected[] = {8.9e-2, 1.3e-2, 8.3e-3};
  for (std::size_t L = 1; L <= 3; ++L) {
    const ReconstructionReport report =
        quality_metrics(reconstruct_density_matrix(reference_weights(L)));
    require_close(report.distance_to_single_photon, expected[L - 1], 2e-3,
                  "distance at L=" + std::to_string(L));
  }
  require_runtime(elapsed_since(start), 1.0, "distance column");
}

void check_table_eigenvalues() {
  const bool expected_negative[] = {false, true, false};
  for (std::size_t L = 1; L <= 3; ++L) {
    const ReconstructionReport report =
        quality_metrics(reconstruct_density_matrix(reference_weights(L)));
    require(report.has_negative_eigenvalue == expected_negative[L - 1],
            "eigenvalue sign pattern broken at L=" + std::to_string(L));
    require((report.min_eigenvalue < -1e-12) == report.has_negative_eigenvalue,
            "numerical-zero guard inconsistent at L=" + std::to_string(L));
  }
}

// -------------------------------------------------------------------------
// criterion 4: pointwise bound parity with exact marginals

void check_bound_parity() {
  const auto start = std::chrono::steady_clock::now();
  const auto grid = uniform_grid(-6.0, 6.0, 0.01);
  const MarginalDensity vacuum = prcs_marginal(0.0, grid);
  std::vector<MarginalDensity> curves;
  for (double mu : kMuSet) curves.push_back(prcs_marginal(mu, grid));

  for (std::size_t L = 1; L <= 3; ++L) {
    const DecoyWeights weights = reference_weights(L);
    const std::vector<MarginalDensity> used(curves.begin(),
                                            curves.begin() + static_cast<std::ptrdiff_t>(L));
    const EstimatedDensity est = estimate_y1(weights, vacuum, used);
    const bool odd = L % 2 == 1;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double exact = single_photon_marginal_at(grid[i]);
      if (odd)
        require(est.values[i] >= exact - 1e-9,
                "odd-L lower violation at x=" + std::to_string(grid[i]));
      else
        require(est.values[i] <= exact + 1e-9,
                "even-L upper violation at x=" + std::to_string(grid[i]));
    }
  }
  require_runtime(elapsed_since(start), 5.0, "bound parity");
}

// -------------------------------------------------------------------------
// criterion 5: desk-scale statistical end-to-end

void check_statistical_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t base_seed = 0xa11ce000;
  const std::vector<double> mu_true = {0.0, 0.178, 0.436, 2.2};
  const int n_records = 100;
  const std::int64_t per_record = 100000;  // 1e7 per channel

  auto channel_config = [&](std::size_t i) {
    SimulationConfig config;
    config.mu_true = mu_true[i];
    config.n_samples_per_record = per_record;
    config.n_records = n_records;
    config.rng_seed = base_seed + (static_cast<std::uint64_t>(i) << 32);
    return config;
  };

  // pass 1: per-channel spread of the record-centered samples
  double sigma_max = 0.0;
  for (std::size_t i = 0; i < mu_true.size(); ++i) {
    const SimulationConfig config = channel_config(i);
    double sum_sq = 0.0;
    double count = 0.0;
    for (int r = 0; r < n_records; ++r) {
      const SampleRecord record = generate_record(config, r);
      double mean = 0.0;
      for (double v : record.samples) mean += v;
      mean /= static_cast<double>(record.samples.size());
      for (double v : record.samples) sum_sq += (v - mean) * (v - mean);
      count += static_cast<double>(record.samples.size());
    }
    sigma_max = std::max(sigma_max, std::sqrt(sum_sq / count));
  }

  // pass 2: pooled histograms on the shared range
  const double hi = 4.0 * sigma_max;
  std::vector<RawHistogram> histograms;
  for (std::size_t i = 0; i < mu_true.size(); ++i) {
    const SimulationConfig config = channel_config(i);
    RawHistogram pooled;
    pooled.lo = -hi;
    pooled.hi = hi;
    pooled.counts.assign(201, 0.0);
    for (int r = 0; r < n_records; ++r) {
      const SampleRecord record = generate_record(config, r);
      double mean = 0.0;
      for (double v : record.samples) mean += v;
      mean /= static_cast<double>(record.samples.size());
      for (double v : record.samples) pooled.add(v - mean);
    }
    histograms.push_back(std::move(pooled));
  }

  const std::vector<RawHistogram> signals(histograms.begin() + 1, histograms.end());
  const std::vector<CalibratedHistogram> calibrated = calibrate(histograms.front(), signals);

  MeanPhotonSet set;
  std::vector<double> counts = {static_cast<double>(calibrated[0].n_samples)};
  for (std::size_t j = 1; j < calibrated.size(); ++j) {
    const MuEstimate fit = fit_mu(calibrated[j]);
    require(fit.sigma > 0.0 && fit.sigma <= 0.01,
            "fit sigma out of range for channel " + std::to_string(j) +
                ": sigma=" + std::to_string(fit.sigma));
    require(std::abs(fit.mu - mu_true[j]) <= 3.0 * fit.sigma,
            "fitted mu misses the truth for channel " + std::to_string(j) +
                ": mu_hat=" + std::to_string(fit.mu) + " sigma=" + std::to_string(fit.sigma));
    set.mus.push_back(fit.mu);
    set.sigmas.push_back(fit.sigma);
    counts.push_back(static_cast<double>(calibrated[j].n_samples));
  }

  const DecoyWeights weights = decoy_weights(set);
  const MarginalDensity vacuum = calibrated[0].as_density();
  std::vector<MarginalDensity> curves;
  for (std::size_t j = 1; j < calibrated.size(); ++j)
    curves.push_back(calibrated[j].as_density());

  EstimatedDensity est = estimate_y1(weights, vacuum, curves);
  est.sigma_values = propagate_errors(weights, vacuum, curves, set.sigmas, counts);

  // the error bars must cover the exact marginal at 90% of the points
  std::size_t covered = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < est.x_grid.size(); ++i) {
    const double x = est.x_grid[i];
    if (x < -3.0 || x > 3.0) continue;
    ++total;
    if (std::abs(est.values[i] - single_photon_marginal_at(x)) <= est.sigma_values[i])
      ++covered;
  }
  const double fraction = static_cast<double>(covered) / static_cast<double>(total);
  require_runtime(elapsed_since(start), 120.0, "statistical end-to-end");
  require(fraction >= 0.90,
          "mu fits passed, but error-bar coverage of the exact Y1 on [-3, 3] is " +
              std::to_string(covered) + "/" + std::to_string(total) + " = " +
              std::to_string(100.0 * fraction) +
              "% (< 90%). This gap is structural, not statistical: with noise-free curves the "
              "L=3 estimate differs from the exact Y1 by its truncation tail (the same k>=4 "
              "leakage that sets the 8.3e-3 density-matrix distance), which exceeds any "
              "statistics-based bar for |x| >~ 1.5 at 1e7 samples per channel; 1-sigma bars "
              "top out near 50% coverage and ~9.5-sigma bars would be needed for 90%");
}

// -------------------------------------------------------------------------
// criterion 6: sampler oracle

void check_sampler_oracle() {
  std::mt19937_64 rng(31415);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const std::size_t n = 1000000;

  for (double mu : {0.0, 0.5, 2.2}) {
    std::vector<double> draws(n);
    for (double& d : draws) d = sample_prcs_quadrature(mu, phase(rng), rng);

    double mean = 0.0;
    for (double d : draws) mean += d;
    mean /= static_cast<double>(n);
    double variance = 0.0;
    for (double d : draws) variance += (d - mean) * (d - mean);
    variance /= static_cast<double>(n);

    const double expected = 0.25 + 0.5 * mu;
    const double m4 = 0.375 * mu * mu + 0.75 * mu + 0.1875;
    const double sigma_stat = std::sqrt((m4 - expected * expected) / static_cast<double>(n));
    require_close(variance, expected, 5.0 * sigma_stat,
                  "pooled variance at mu=" + std::to_string(mu));

    // chi-squared against the marginal with 100 bins
    const double spread = std::sqrt(expected);
    const double lo = -4.5 * spread;
    const double hi = 4.5 * spread;
    const int n_bins = 100;
    std::vector<double> counts(n_bins, 0.0);
    for (double d : draws) {
      if (d < lo || d >= hi) continue;
      counts[static_cast<std::size_t>((d - lo) / (hi - lo) * n_bins)] += 1.0;
    }
    double chi2 = 0.0;
    double dof = 0.0;
    const double width = (hi - lo) / n_bins;
    for (int b = 0; b < n_bins; ++b) {
      const double a = lo + b * width;
      const double p =
          simpson([&](double x) { return prcs_marginal_at(mu, x); }, a, a + width, 8);
      const double expected_count = p * static_cast<double>(n);
      if (expected_count < 10.0) continue;
      chi2 += (counts[static_cast<std::size_t>(b)] - expected_count) *
              (counts[static_cast<std::size_t>(b)] - expected_count) / expected_count;
      dof += 1.0;
    }
    require(chi2 < chi2_critical_1pct(dof - 1.0),
            "chi-squared " + std::to_string(chi2) + " exceeds the 1% critical value at mu=" +
                std::to_string(mu));
  }
}

// -------------------------------------------------------------------------
// criterion 7: the three reconstructions are one linear functional

void check_cross_representation() {
  const DecoyWeights weights = reference_weights(3);
  const auto grid = uniform_grid(-3.0, 3.0, 0.01);
  const MarginalDensity vacuum = prcs_marginal(0.0, grid);
  std::vector<MarginalDensity> curves;
  for (double mu : kMuSet) curves.push_back(prcs_marginal(mu, grid));
  const EstimatedDensity direct = estimate_y1(weights, vacuum, curves);

  const DiagonalFockState rho = reconstruct_density_matrix(weights);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double from_rho = 0.0;
    for (std::size_t k = 0; k < rho.diag.size(); ++k)
      from_rho += rho.diag[k] * fock_quadrature_density(static_cast<int>(k), grid[i]);
    require(std::abs(from_rho - direct.values[i]) < 1e-4,
            "rho-marginal mismatch at x=" + std::to_string(grid[i]));
  }

  for (double x = -3.0; x <= 3.0 + 1e-12; x += 0.05) {
    const double integral = simpson(
        [&](double p) { return wigner_estimate_at(weights, std::sqrt(x * x + p * p)); }, -6.0,
        6.0, 1200);
    const std::size_t i = static_cast<std::size_t>(std::llround((x + 3.0) / 0.01));
    require(std::abs(integral - direct.values[i]) < 1e-4,
            "Wigner-marginal mismatch at x=" + std::to_string(x));
  }
}

// -------------------------------------------------------------------------
// criterion 8: normalization suite

void check_normalization_suite() {
  const std::vector<double> mus = {0.0, 0.1, 0.5, 1.0, 2.2, 5.0};
  const auto x_grid = uniform_grid(-6.0, 6.0, 0.01);
  const auto r_grid = uniform_grid(0.0, 6.0, 0.002);
  TruncationPolicy policy;

  for (double mu : mus) {
    const MarginalDensity marginal = prcs_marginal(mu, x_grid, policy);
    const std::size_t n = x_grid.size();
    double integral = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      require(marginal.values[i] >= 0.0, "negative density at mu=" + std::to_string(mu));
      require(std::abs(marginal.values[i] - marginal.values[n - 1 - i]) <= 1e-12,
              "parity violation at mu=" + std::to_string(mu));
      integral += marginal.values[i] * marginal.grid_step;
    }
    require(std::abs(integral - 1.0) < 1e-6,
            "marginal normalization off at mu=" + std::to_string(mu));

    // mixture equals a summation ten times deeper
    const int deep = 10 * policy.max_photon_number(mu);
    for (std::size_t i = 0; i < n; i += 7) {
      const double oracle = deep_marginal(mu, x_grid[i], deep);
      require(std::abs(marginal.values[i] - oracle) < 1e-10,
              "truncation drift at mu=" + std::to_string(mu) +
                  ", x=" + std::to_string(x_grid[i]));
    }

    const RadialWignerProfile wigner = prcs_wigner_radial(mu, r_grid);
    double norm = 0.0;
    for (std::size_t i = 0; i < r_grid.size(); ++i)
      norm += r_grid[i] * wigner.values[i] * 0.002;
    require(std::abs(2.0 * kPi * norm - 1.0) < 1e-4,
            "Wigner normalization off at mu=" + std::to_string(mu));
  }

  // marginal equals the p-integral of the Wigner function
  for (double mu : {0.0, 0.178, 0.436, 2.2}) {
    for (double x = -6.0; x <= 6.0 + 1e-12; x += 0.25) {
      const double integral = simpson(
          [&](double p) { return prcs_wigner_at(mu, std::sqrt(x * x + p * p)); }, -6.0, 6.0,
          1200);
      require(std::abs(integral - prcs_marginal_at(mu, x)) < 1e-4,
              "Wigner/marginal inconsistency at mu=" + std::to_string(mu) +
                  ", x=" + std::to_string(x));
    }
  }

  for (int k = 0; k <= 50; ++k) {
    const double integral =
        simpson([&](double x) { return fock_quadrature_density(k, x); }, -12.0, 12.0, 24000);
    require(std::abs(integral - 1.0) < 1e-8,
            "Fock density normalization off at k=" + std::to_string(k));
  }
}

}  // namespace

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  const std::pair<const char*, std::function<void()>> criteria[] = {
      {"reference traces 1.095 / 0.985 / 1.013 within 2e-3", check_table_traces},
      {"reference distances 8.9e-2 / 1.3e-2 / 8.3e-3 within 2e-3", check_table_distances},
      {"negative eigenvalues exactly for L=2 (no / yes / no)", check_table_eigenvalues},
      {"pointwise bound parity of the Y1 estimates", check_bound_parity},
      {"statistical end-to-end at 1e7 samples per channel", check_statistical_end_to_end},
      {"sampler variance and chi-squared oracle", check_sampler_oracle},
      {"cross-representation consistency within 1e-4", check_cross_representation},
      {"normalization suite for densities and profiles", check_normalization_suite},
  };

  for (int i = 0; i < 8; ++i) {
    if (only != 0 && only != i + 1) continue;
    criterion(i + 1, criteria[i].first, criteria[i].second);
  }

  if (g_failures == 0) {
    std::printf("acceptance: all selected criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}
