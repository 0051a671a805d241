#include "prcstomo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "prcstomo/errors.hpp"
#include "prcstomo/grid.hpp"

namespace prcstomo {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string channel_tag(std::size_t i) { return "ch" + std::to_string(i); }

std::filesystem::path records_dir_for(const PipelineConfig& config, std::size_t i) {
  if (!config.channels[i].records_dir.empty()) return config.channels[i].records_dir;
  return config.out_dir / "records" / channel_tag(i);
}

std::filesystem::path calibrated_path(const PipelineConfig& config, std::size_t i) {
  return config.out_dir / "calibrated" / (channel_tag(i) + ".txt");
}

SimulationConfig simulation_config_for(const PipelineConfig& config, std::size_t i) {
  SimulationConfig sim;
  sim.mu_true = config.channels[i].mu;
  sim.n_samples_per_record = config.samples_per_record;
  sim.n_records = config.n_records;
  sim.electronic_noise_sigma = config.noise_sigma;
  sim.phase_periods = config.phase_periods;
  sim.gain = config.gain;
  sim.rng_seed = config.seed + (static_cast<std::uint64_t>(i) << 32);
  return sim;
}

void ensure_out_dir(const PipelineConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" + config.out_dir.string() +
                  "': " + ec.message());
}

void reject_theoretical(const PipelineConfig& config, const char* stage) {
  if (config.theoretical)
    throw ValidationError(std::string(stage) + ": theoretical mode has no sampling stages");
}

// Standard deviation of the per-record-centered samples of one channel.
double centered_std(const std::vector<SampleRecord>& records) {
  double sum_sq = 0.0;
  double count = 0.0;
  for (const SampleRecord& record : records) {
    double mean = 0.0;
    for (double v : record.samples) mean += v;
    mean /= static_cast<double>(record.samples.size());
    for (double v : record.samples) sum_sq += (v - mean) * (v - mean);
    count += static_cast<double>(record.samples.size());
  }
  return std::sqrt(sum_sq / count);
}

struct FitSummary {
  std::vector<MuEstimate> fits;  // one per channel, vacuum first
};

FitSummary read_fit_summary(const PipelineConfig& config) {
  const auto path = config.out_dir / "mu_fits.txt";
  if (!std::filesystem::exists(path))
    throw IoError("missing '" + path.string() + "' (run the fit-mu stage first)");
  const auto map = read_summary(path);
  FitSummary summary;
  const std::size_t n = config.channels.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string suffix = "_" + std::to_string(i);
    MuEstimate est;
    est.mu = std::stod(map.at("mu_hat" + suffix));
    est.sigma = std::stod(map.at("sigma_mu" + suffix));
    est.fit_residual = std::stod(map.at("residual" + suffix));
    summary.fits.push_back(est);
  }
  return summary;
}

// Mean photon set used for estimation/reconstruction: fitted values in
// experimental mode, channel targets in theoretical mode.
MeanPhotonSet photon_set(const PipelineConfig& config) {
  MeanPhotonSet set;
  if (config.theoretical) {
    for (std::size_t i = 1; i < config.channels.size(); ++i) {
      set.mus.push_back(config.channels[i].mu);
      set.sigmas.push_back(0.0);
    }
  } else {
    const FitSummary summary = read_fit_summary(config);
    for (std::size_t i = 1; i < config.channels.size(); ++i) {
      set.mus.push_back(summary.fits[i].mu);
      set.sigmas.push_back(summary.fits[i].sigma);
    }
  }
  return set;
}

MeanPhotonSet prefix_set(const MeanPhotonSet& set, std::size_t L) {
  MeanPhotonSet out;
  out.mus.assign(set.mus.begin(), set.mus.begin() + static_cast<std::ptrdiff_t>(L));
  out.sigmas.assign(set.sigmas.begin(), set.sigmas.begin() + static_cast<std::ptrdiff_t>(L));
  out.separation_floor = set.separation_floor;
  return out;
}

std::string mu_list_string(const MeanPhotonSet& set, std::size_t L) {
  std::string s;
  for (std::size_t j = 0; j < L; ++j) {
    if (j) s += ", ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", set.mus[j]);
    s += buf;
  }
  return s;
}

}  // namespace

void PipelineConfig::validate() const {
  if (channels.empty()) throw ValidationError("config: no channels defined");
  const ChannelSpec& vacuum = channels.front();
  if (vacuum.records_dir.empty() && vacuum.mu != 0.0)
    throw ValidationError("config: first channel must be the vacuum (mu = 0)");
  if (channels.size() < 2)
    throw ValidationError("config: need at least one non-vacuum channel besides the vacuum");
  for (std::size_t i = 1; i < channels.size(); ++i) {
    const ChannelSpec& ch = channels[i];
    if (ch.records_dir.empty() && !(ch.mu > 0.0))
      throw ValidationError("config: channel " + std::to_string(i) +
                            " needs a positive mu or a records path");
    if (theoretical && !(ch.mu > 0.0))
      throw ValidationError("config: theoretical mode requires explicit channel mu values");
  }
  for (std::size_t i = 2; i < channels.size(); ++i) {
    if (channels[i].mu > 0.0 && channels[i - 1].mu > 0.0 && channels[i].mu <= channels[i - 1].mu)
      throw ValidationError("config: channel mu values must be strictly ascending");
  }
  if (n_bins < 2) throw ValidationError("config: bins must be at least 2");
  if (samples_per_record <= 0) throw ValidationError("config: samples must be positive");
  if (n_records <= 0) throw ValidationError("config: records must be positive");
  if (!(noise_sigma >= 0.0)) throw ValidationError("config: noise must be >= 0");
  if (!(gain > 0.0)) throw ValidationError("config: gain must be positive");
  if (!(phase_periods > 0.0)) throw ValidationError("config: phase_periods must be positive");
  if (!(x_step > 0.0) || !(x_max > x_min)) throw ValidationError("config: bad x grid");
  if (!(r_step > 0.0) || !(r_max > 0.0)) throw ValidationError("config: bad r grid");
  if (out_dir.empty()) throw ValidationError("config: out_dir must not be empty");
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  const std::string file = path.string();

  PipelineConfig config;
  config.channels.clear();
  ChannelSpec* current = nullptr;

  auto parse_double_field = [&](const std::string& value, const std::string& key, long line_no) {
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      throw ValidationError("config: bad numeric value for '" + key + "' (" + file + ":" +
                            std::to_string(line_no) + ")");
    }
  };
  auto parse_int_field = [&](const std::string& value, const std::string& key,
                             long line_no) -> long long {
    try {
      return std::stoll(value);
    } catch (const std::exception&) {
      throw ValidationError("config: bad integer value for '" + key + "' (" + file + ":" +
                            std::to_string(line_no) + ")");
    }
  };

  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.empty() || line[0] == '#') continue;

    if (line == "[vacuum]" || line == "[channel]") {
      config.channels.emplace_back();
      current = &config.channels.back();
      if (line == "[vacuum]" && config.channels.size() != 1)
        throw ValidationError("config: [vacuum] must be the first channel section (" + file +
                              ":" + std::to_string(line_no) + ")");
      continue;
    }
    if (line[0] == '[')
      throw ValidationError("config: unknown section '" + line + "' (" + file + ":" +
                            std::to_string(line_no) + ")");

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config: expected key = value (" + file + ":" +
                            std::to_string(line_no) + ")");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (current) {
      if (key == "mu") current->mu = parse_double_field(value, key, line_no);
      else if (key == "records") current->records_dir = value;
      else
        throw ValidationError("config: unknown channel key '" + key + "' (" + file + ":" +
                              std::to_string(line_no) + ")");
      continue;
    }

    if (key == "out_dir") config.out_dir = value;
    else if (key == "seed")
      config.seed = static_cast<std::uint64_t>(parse_int_field(value, key, line_no));
    else if (key == "bins") config.n_bins = static_cast<int>(parse_int_field(value, key, line_no));
    else if (key == "theoretical") config.theoretical = (value == "true" || value == "1");
    else if (key == "samples_per_record")
      config.samples_per_record = parse_int_field(value, key, line_no);
    else if (key == "n_records")
      config.n_records = static_cast<int>(parse_int_field(value, key, line_no));
    else if (key == "noise_sigma") config.noise_sigma = parse_double_field(value, key, line_no);
    else if (key == "gain") config.gain = parse_double_field(value, key, line_no);
    else if (key == "phase_periods")
      config.phase_periods = parse_double_field(value, key, line_no);
    else if (key == "x_min") config.x_min = parse_double_field(value, key, line_no);
    else if (key == "x_max") config.x_max = parse_double_field(value, key, line_no);
    else if (key == "x_step") config.x_step = parse_double_field(value, key, line_no);
    else if (key == "r_max") config.r_max = parse_double_field(value, key, line_no);
    else if (key == "r_step") config.r_step = parse_double_field(value, key, line_no);
    else if (key == "tail_tolerance")
      config.policy.tail_tolerance = parse_double_field(value, key, line_no);
    else if (key == "k_min_cap")
      config.policy.k_min_cap = static_cast<int>(parse_int_field(value, key, line_no));
    else
      throw ValidationError("config: unknown key '" + key + "' (" + file + ":" +
                            std::to_string(line_no) + ")");
  }
  return config;
}

void stage_simulate(const PipelineConfig& config) {
  config.validate();
  reject_theoretical(config, "simulate");
  ensure_out_dir(config);
  for (std::size_t i = 0; i < config.channels.size(); ++i) {
    if (!config.channels[i].records_dir.empty()) continue;  // externally provided
    const SimulationConfig sim = simulation_config_for(config, i);
    write_records(generate_records(sim), records_dir_for(config, i));
  }
}

void stage_calibrate(const PipelineConfig& config) {
  config.validate();
  reject_theoretical(config, "calibrate");
  ensure_out_dir(config);

  // Shared binning: 201-style bins over +-4 sigma of the widest channel,
  // in raw units.
  double sigma_max = 0.0;
  for (std::size_t i = 0; i < config.channels.size(); ++i) {
    const auto records = read_records(records_dir_for(config, i));
    sigma_max = std::max(sigma_max, centered_std(records));
  }
  if (!(sigma_max > 0.0)) throw ValidationError("calibrate: degenerate sample spread");
  const double hi = 4.0 * sigma_max;

  std::vector<RawHistogram> histograms;
  for (std::size_t i = 0; i < config.channels.size(); ++i) {
    const auto records = read_records(records_dir_for(config, i));
    histograms.push_back(pool_records(records, config.n_bins, -hi, hi));
  }

  const std::vector<RawHistogram> signals(histograms.begin() + 1, histograms.end());
  const std::vector<CalibratedHistogram> calibrated = calibrate(histograms.front(), signals);

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir / "calibrated", ec);
  if (ec) throw IoError("cannot create calibrated directory: " + ec.message());
  for (std::size_t i = 0; i < calibrated.size(); ++i)
    write_calibrated(calibrated[i], calibrated_path(config, i));
}

void stage_fit_mu(const PipelineConfig& config) {
  config.validate();
  reject_theoretical(config, "fit-mu");

  std::vector<std::pair<std::string, std::string>> summary;
  summary.emplace_back("n_channels", std::to_string(config.channels.size()));

  for (std::size_t i = 0; i < config.channels.size(); ++i) {
    const auto path = calibrated_path(config, i);
    if (!std::filesystem::exists(path))
      throw IoError("missing '" + path.string() + "' (run the calibrate stage first)");
    const CalibratedHistogram hist = read_calibrated(path);
    const MuEstimate fit = fit_mu(hist, config.policy);
    write_calibrated(hist, path, fit);

    const std::string suffix = "_" + std::to_string(i);
    summary.emplace_back("mu_hat" + suffix, format_double(fit.mu));
    summary.emplace_back("sigma_mu" + suffix, format_double(fit.sigma));
    summary.emplace_back("residual" + suffix, format_double(fit.fit_residual));
    summary.emplace_back("sub_vacuum" + suffix, fit.sub_vacuum ? "1" : "0");

    // Observed vs fitted-theory overlay.
    Table overlay;
    overlay.columns = {"x", "density_observed", "density_theory"};
    const MarginalDensity theory = prcs_marginal(fit.mu, hist.x_grid, config.policy);
    for (std::size_t b = 0; b < hist.x_grid.size(); ++b)
      overlay.rows.push_back({hist.x_grid[b], hist.density[b], theory.values[b]});
    write_table(overlay, config.out_dir / ("histogram_" + channel_tag(i) + ".txt"));
  }
  write_summary(summary, config.out_dir / "mu_fits.txt");
}

void stage_estimate(const PipelineConfig& config) {
  config.validate();
  ensure_out_dir(config);

  MarginalDensity vacuum;
  std::vector<MarginalDensity> curves;
  std::vector<double> counts;  // per channel, vacuum first
  const MeanPhotonSet set = photon_set(config);

  if (config.theoretical) {
    const std::vector<double> x_grid = uniform_grid(config.x_min, config.x_max, config.x_step);
    vacuum = prcs_marginal(0.0, x_grid, config.policy);
    counts.push_back(std::numeric_limits<double>::infinity());
    for (double mu : set.mus) {
      curves.push_back(prcs_marginal(mu, x_grid, config.policy));
      counts.push_back(std::numeric_limits<double>::infinity());
    }
  } else {
    for (std::size_t i = 0; i < config.channels.size(); ++i) {
      const auto path = calibrated_path(config, i);
      if (!std::filesystem::exists(path))
        throw IoError("missing '" + path.string() + "' (run the calibrate stage first)");
      const CalibratedHistogram hist = read_calibrated(path);
      counts.push_back(static_cast<double>(hist.n_samples));
      if (i == 0) vacuum = hist.as_density();
      else curves.push_back(hist.as_density());
    }
  }

  for (std::size_t L = 1; L <= set.mus.size(); ++L) {
    const DecoyWeights weights = decoy_weights(prefix_set(set, L));
    const std::vector<MarginalDensity> used(curves.begin(),
                                            curves.begin() + static_cast<std::ptrdiff_t>(L));
    EstimatedDensity est = estimate_y1(weights, vacuum, used);
    const std::vector<double> used_counts(counts.begin(),
                                          counts.begin() + static_cast<std::ptrdiff_t>(L) + 1);
    est.sigma_values =
        propagate_errors(weights, vacuum, used, prefix_set(set, L).sigmas, used_counts);

    Table table;
    table.columns = {"x", "Y1_est", "sigma", "Y1_exact"};
    for (std::size_t i = 0; i < est.x_grid.size(); ++i)
      table.rows.push_back({est.x_grid[i], est.values[i], est.sigma_values[i],
                            single_photon_marginal_at(est.x_grid[i])});
    write_table(table, config.out_dir / ("y1_est_L" + std::to_string(L) + ".txt"));
  }
}

void stage_reconstruct(const PipelineConfig& config) {
  config.validate();
  ensure_out_dir(config);
  const MeanPhotonSet set = photon_set(config);
  const std::vector<double> r_grid = uniform_grid(0.0, config.r_max, config.r_step);

  for (std::size_t L = 1; L <= set.mus.size(); ++L) {
    const DecoyWeights weights = decoy_weights(prefix_set(set, L));

    const RadialWignerProfile wigner = reconstruct_wigner(weights, r_grid);
    Table wigner_table;
    wigner_table.columns = {"r", "W_est", "W_exact"};
    for (std::size_t i = 0; i < wigner.r_grid.size(); ++i)
      wigner_table.rows.push_back(
          {wigner.r_grid[i], wigner.values[i], single_photon_wigner_at(wigner.r_grid[i])});
    write_table(wigner_table, config.out_dir / ("wigner_L" + std::to_string(L) + ".txt"));

    const DiagonalFockState rho = reconstruct_density_matrix(weights, config.policy);
    Table rho_table;
    rho_table.columns = {"k", "rho_est_diag"};
    for (std::size_t k = 0; k < rho.diag.size(); ++k)
      rho_table.rows.push_back({static_cast<double>(k), rho.diag[k]});
    write_table(rho_table, config.out_dir / ("rho_diag_L" + std::to_string(L) + ".txt"));
  }
}

void stage_report(const PipelineConfig& config) {
  config.validate();
  ensure_out_dir(config);
  const MeanPhotonSet set = photon_set(config);

  std::vector<std::pair<std::string, std::string>> summary;
  summary.emplace_back("mode", config.theoretical ? "theoretical" : "experimental");
  summary.emplace_back("n_channels", std::to_string(config.channels.size()));
  for (std::size_t j = 0; j < set.mus.size(); ++j) {
    const std::string suffix = "_" + std::to_string(j + 1);
    summary.emplace_back("mu" + suffix, format_double(set.mus[j]));
    summary.emplace_back("sigma_mu" + suffix, format_double(set.sigmas[j]));
  }

  std::ostringstream human;
  human << "single-photon reconstruction from phase-randomized coherent states\n";
  human << "mode: " << (config.theoretical ? "theoretical" : "experimental") << "\n\n";
  human << " L  mu_set                    trace       distance    negative_eigenvalues\n";

  for (std::size_t L = 1; L <= set.mus.size(); ++L) {
    const DecoyWeights weights = decoy_weights(prefix_set(set, L));
    const ReconstructionReport report =
        quality_metrics(reconstruct_density_matrix(weights, config.policy));

    char row[160];
    std::snprintf(row, sizeof(row), "%2zu  %-24s  %10.6f  %10.4e  %s\n", L,
                  mu_list_string(set, L).c_str(), report.trace,
                  report.distance_to_single_photon,
                  report.has_negative_eigenvalue ? "yes" : "no");
    human << row;

    const std::string prefix = "L" + std::to_string(L) + "_";
    summary.emplace_back(prefix + "trace", format_double(report.trace));
    summary.emplace_back(prefix + "distance", format_double(report.distance_to_single_photon));
    summary.emplace_back(prefix + "min_eigenvalue", format_double(report.min_eigenvalue));
    summary.emplace_back(prefix + "has_negative", report.has_negative_eigenvalue ? "1" : "0");
    summary.emplace_back(prefix + "k_max", std::to_string(report.k_max));
  }

  std::ofstream out(config.out_dir / "report.txt");
  if (!out) throw IoError("cannot write report.txt");
  out << human.str();
  write_summary(summary, config.out_dir / "summary.txt");
}

void run(const PipelineConfig& config) {
  config.validate();
  if (!config.theoretical) {
    stage_simulate(config);
    stage_calibrate(config);
    stage_fit_mu(config);
  }
  stage_estimate(config);
  stage_reconstruct(config);
  stage_report(config);
}

void write_table(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "# ";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::string file = path.string();

  Table table;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      std::stringstream ss(body);
      std::string col;
      table.columns.clear();
      while (std::getline(ss, col, ',')) {
        const auto b = col.find_first_not_of(' ');
        const auto e = col.find_last_not_of(' ');
        table.columns.push_back(b == std::string::npos ? "" : col.substr(b, e - b + 1));
      }
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(file, line_no, "malformed number '" + cell + "'");
      }
    }
    if (!table.columns.empty() && row.size() != table.columns.size())
      throw ParseError(file, line_no, "row width does not match the column header");
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_summary(const std::vector<std::pair<std::string, std::string>>& entries,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "# key=value summary\n";
  for (const auto& [key, value] : entries) out << key << '=' << value << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::map<std::string, std::string> read_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::map<std::string, std::string> map;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path.string(), line_no, "expected key=value");
    map[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return map;
}

}  // namespace prcstomo
