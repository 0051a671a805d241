#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

namespace prcstomo {

/// Knobs for one synthetic acquisition run. Desk-scale defaults: 1e5
/// samples per record, 100 records. Integer phase_periods sweep a whole
/// number of 2*pi intervals per record and give perfect phase
/// randomization; fractional values model an imperfect ramp.
struct SimulationConfig {
  double mu_true = 0.0;
  std::int64_t n_samples_per_record = 100000;
  int n_records = 100;
  double electronic_noise_sigma = 0.0;  // quadrature units, added before the gain
  double phase_periods = 16.0;
  std::uint64_t rng_seed = 0;
  double gain = 3.7;  // raw detector units per quadrature unit

  void validate() const;
};

bool operator==(const SimulationConfig& a, const SimulationConfig& b);

/// One sampling record in raw detector units (gain applied, mean not yet
/// subtracted; the underlying model is centered).
struct SampleRecord {
  std::vector<double> samples;
  int record_index = 0;
  SimulationConfig config_echo;
};

bool operator==(const SampleRecord& a, const SampleRecord& b);

/// Triangular ramp position for a normalized time u in [0, 1]: rises 0 -> 1
/// over the first half, falls back over the second.
double triangle_ramp(double u);

/// One homodyne outcome in quadrature units for a coherent state of mean
/// photon number mu held at a fixed phase: sqrt(mu) cos(phase) plus vacuum
/// noise of standard deviation 1/2. Averaged over uniform phase this
/// reproduces the PRCS marginal exactly.
double sample_prcs_quadrature(double mu, double phase, std::mt19937_64& rng);

/// One record: phases follow the triangular ramp, each sample gets vacuum
/// noise plus optional electronic noise, and the gain converts to raw
/// units. The RNG stream is derived from rng_seed ^ record_index, so
/// records are independent and reproducible in any order.
SampleRecord generate_record(const SimulationConfig& config, int record_index);

std::vector<SampleRecord> generate_records(const SimulationConfig& config);

/// Record file: '#' key=value header (mu_true, gain, seed, n_samples,
/// record_index, noise_sigma, phase_periods, n_records), then one sample
/// per line at full round-trip precision.
void write_record(const SampleRecord& record, const std::filesystem::path& path);
SampleRecord read_record(const std::filesystem::path& path);

/// Writes record_NNNNN.txt files into dir; returns the paths.
std::vector<std::filesystem::path> write_records(const std::vector<SampleRecord>& records,
                                                 const std::filesystem::path& dir);

/// Reads every record_*.txt in dir, sorted by filename.
std::vector<SampleRecord> read_records(const std::filesystem::path& dir);

}  // namespace prcstomo
