#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "prcstomo/calibration.hpp"
#include "prcstomo/decoy_estimator.hpp"
#include "prcstomo/reconstruct.hpp"

namespace prcstomo {

/// One input channel: a target mean photon number to simulate, or a
/// directory of pre-recorded sample files (mu then comes from the file
/// headers and the fit).
struct ChannelSpec {
  double mu = 0.0;
  std::filesystem::path records_dir;
};

/// Full pipeline configuration. channels[0] must be the vacuum; all
/// channels share binning, grids, gain and noise settings.
struct PipelineConfig {
  std::vector<ChannelSpec> channels;
  bool theoretical = false;
  int n_bins = 201;
  std::int64_t samples_per_record = 100000;
  int n_records = 100;
  double noise_sigma = 0.0;
  double gain = 3.7;
  double phase_periods = 16.0;
  std::uint64_t seed = 0;
  TruncationPolicy policy;
  double x_min = -6.0;
  double x_max = 6.0;
  double x_step = 0.01;
  double r_max = 6.0;
  double r_step = 0.01;
  std::filesystem::path out_dir = "out";

  void validate() const;
};

/// Flat key=value config with one [vacuum] / [channel] section per input
/// channel. Unknown keys are rejected by name.
PipelineConfig load_config(const std::filesystem::path& path);

/// Stage outputs under out_dir:
///   records/ch<i>/record_*.txt     simulate
///   calibrated/ch<i>.txt           calibrate (mu_hat filled in by fit-mu)
///   mu_fits.txt                    fit-mu
///   histogram_ch<i>.txt            fit-mu    (x, density_observed, density_theory)
///   y1_est_L<L>.txt                estimate  (x, Y1_est, sigma, Y1_exact)
///   wigner_L<L>.txt                reconstruct (r, W_est, W_exact)
///   rho_diag_L<L>.txt              reconstruct (k, rho_est_diag)
///   report.txt, summary.txt        report
/// Stages consume the previous stage's files; a missing input raises
/// IoError. Theoretical mode skips the sampling stages entirely.
void stage_simulate(const PipelineConfig& config);
void stage_calibrate(const PipelineConfig& config);
void stage_fit_mu(const PipelineConfig& config);
void stage_estimate(const PipelineConfig& config);
void stage_reconstruct(const PipelineConfig& config);
void stage_report(const PipelineConfig& config);

/// All stages in order, through the same file interfaces the individual
/// subcommands use; deterministic for a fixed config and seed.
void run(const PipelineConfig& config);

/// Comma-separated numeric table with a '#' column header line.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_table(const Table& table, const std::filesystem::path& path);
Table read_table(const std::filesystem::path& path);

void write_summary(const std::vector<std::pair<std::string, std::string>>& entries,
                   const std::filesystem::path& path);
std::map<std::string, std::string> read_summary(const std::filesystem::path& path);

}  // namespace prcstomo
