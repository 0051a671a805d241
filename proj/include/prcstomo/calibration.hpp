#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "prcstomo/quantum_math.hpp"
#include "prcstomo/synth_lab.hpp"

namespace prcstomo {

/// Fixed-range histogram in raw detector units. Bins are half-open except
/// the last, which includes the upper edge; out-of-range samples are
/// counted separately.
struct RawHistogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> counts;
  std::int64_t n_out_of_range = 0;

  double bin_width() const;
  double bin_center(std::size_t i) const;
  double total_count() const;
  double mean() const;
  /// Binned variance about the mean with Sheppard's grouping correction
  /// (subtracts bin_width^2 / 12).
  double variance() const;

  void add(double value);
  void merge(const RawHistogram& other);
};

RawHistogram build_histogram(std::span<const double> samples, int n_bins, double lo, double hi);

/// Pools records into one histogram, subtracting each record's own mean
/// before accumulation.
RawHistogram pool_records(const std::vector<SampleRecord>& records, int n_bins, double lo,
                          double hi);

/// Rescaled, normalized histogram in quadrature units: the vacuum variance
/// is pinned to 1/4 and sum(density) * delta_x = 1.
struct CalibratedHistogram {
  std::vector<double> x_grid;  // bin centers
  std::vector<double> density;
  double delta_x = 0.0;
  std::int64_t n_samples = 0;
  double scale_factor = 0.0;  // raw -> quadrature conversion used

  double mean() const;
  double variance() const;  // Sheppard-corrected, quadrature units
  MarginalDensity as_density() const;
};

/// Calibrates a shared-binning histogram set against its vacuum member:
/// the vacuum mean is subtracted from every x axis, the axes are scaled by
/// 1/(2 sqrt(v)) with v the vacuum variance, and densities are normalized.
/// Returns the vacuum first, then the signals in input order.
std::vector<CalibratedHistogram> calibrate(const RawHistogram& vacuum,
                                           const std::vector<RawHistogram>& signals);

struct MuEstimate {
  double mu = 0.0;
  double sigma = 0.0;
  double fit_residual = 0.0;
  bool sub_vacuum = false;  // histogram variance significantly below 1/4
};

/// Least-squares fit of the PRCS marginal to a calibrated histogram with mu
/// as the only parameter: golden-section bracketing refined by parabolic
/// steps to relative tolerance 1e-8; sigma from the curvature of the
/// residual sum at the minimum scaled by the residual variance.
MuEstimate fit_mu(const CalibratedHistogram& hist, const TruncationPolicy& policy = {});

/// Calibrated histogram file: '#' key=value header (mu_hat, sigma_mu,
/// delta_x, n_samples, scale_factor), then one "x,density" pair per line.
void write_calibrated(const CalibratedHistogram& hist, const std::filesystem::path& path,
                      const std::optional<MuEstimate>& fit = std::nullopt);
CalibratedHistogram read_calibrated(const std::filesystem::path& path,
                                    std::optional<MuEstimate>* fit_out = nullptr);

}  // namespace prcstomo
