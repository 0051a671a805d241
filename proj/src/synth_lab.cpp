#include "prcstomo/synth_lab.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <string>

#include "prcstomo/errors.hpp"

namespace prcstomo {

namespace {

// splitmix64; decorrelates the per-record seeds derived by xor.
std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& file, long line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError(file, line, "expected a number, got '" + text + "'");
  }
}

}  // namespace

void SimulationConfig::validate() const {
  if (!(mu_true >= 0.0) || !std::isfinite(mu_true))
    throw std::domain_error("SimulationConfig: mu_true must be finite and >= 0");
  if (n_samples_per_record <= 0)
    throw std::domain_error("SimulationConfig: n_samples_per_record must be positive");
  if (n_records <= 0) throw std::domain_error("SimulationConfig: n_records must be positive");
  if (!(electronic_noise_sigma >= 0.0))
    throw std::domain_error("SimulationConfig: electronic_noise_sigma must be >= 0");
  if (!(phase_periods > 0.0))
    throw std::domain_error("SimulationConfig: phase_periods must be positive");
  if (!(gain > 0.0)) throw std::domain_error("SimulationConfig: gain must be positive");
}

bool operator==(const SimulationConfig& a, const SimulationConfig& b) {
  return a.mu_true == b.mu_true && a.n_samples_per_record == b.n_samples_per_record &&
         a.n_records == b.n_records && a.electronic_noise_sigma == b.electronic_noise_sigma &&
         a.phase_periods == b.phase_periods && a.rng_seed == b.rng_seed && a.gain == b.gain;
}

bool operator==(const SampleRecord& a, const SampleRecord& b) {
  return a.record_index == b.record_index && a.config_echo == b.config_echo &&
         a.samples == b.samples;
}

double triangle_ramp(double u) { return 1.0 - std::abs(2.0 * u - 1.0); }

double sample_prcs_quadrature(double mu, double phase, std::mt19937_64& rng) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::domain_error("sample_prcs_quadrature: mu must be finite and >= 0");
  std::normal_distribution<double> vacuum_noise(0.0, 0.5);
  return std::sqrt(mu) * std::cos(phase) + vacuum_noise(rng);
}

SampleRecord generate_record(const SimulationConfig& config, int record_index) {
  config.validate();
  if (record_index < 0) throw std::domain_error("generate_record: record_index must be >= 0");

  SampleRecord record;
  record.record_index = record_index;
  record.config_echo = config;
  record.samples.resize(static_cast<std::size_t>(config.n_samples_per_record));

  std::mt19937_64 rng(mix_seed(config.rng_seed ^ static_cast<std::uint64_t>(record_index)));
  std::normal_distribution<double> vacuum_noise(0.0, 0.5);
  std::normal_distribution<double> electronic_noise(0.0, config.electronic_noise_sigma);

  const double amplitude = std::sqrt(config.mu_true);
  const double n = static_cast<double>(config.n_samples_per_record);
  for (std::int64_t i = 0; i < config.n_samples_per_record; ++i) {
    const double phase =
        2.0 * std::numbers::pi * config.phase_periods * triangle_ramp(static_cast<double>(i) / n);
    double value = amplitude * std::cos(phase) + vacuum_noise(rng);
    if (config.electronic_noise_sigma > 0.0) value += electronic_noise(rng);
    record.samples[static_cast<std::size_t>(i)] = config.gain * value;
  }
  return record;
}

std::vector<SampleRecord> generate_records(const SimulationConfig& config) {
  config.validate();
  std::vector<SampleRecord> records;
  records.reserve(static_cast<std::size_t>(config.n_records));
  for (int i = 0; i < config.n_records; ++i) records.push_back(generate_record(config, i));
  return records;
}

void write_record(const SampleRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const SimulationConfig& c = record.config_echo;
  out << "# mu_true=" << format_double(c.mu_true) << '\n';
  out << "# gain=" << format_double(c.gain) << '\n';
  out << "# seed=" << c.rng_seed << '\n';
  out << "# n_samples=" << c.n_samples_per_record << '\n';
  out << "# record_index=" << record.record_index << '\n';
  out << "# noise_sigma=" << format_double(c.electronic_noise_sigma) << '\n';
  out << "# phase_periods=" << format_double(c.phase_periods) << '\n';
  out << "# n_records=" << c.n_records << '\n';
  for (double v : record.samples) out << format_double(v) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

SampleRecord read_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::string file = path.string();

  SampleRecord record;
  std::map<std::string, std::string> header;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      const std::size_t start = body.find_first_not_of(' ');
      if (start == std::string::npos) continue;
      body = body.substr(start);
      const std::size_t eq = body.find('=');
      if (eq == std::string::npos) throw ParseError(file, line_no, "header line lacks key=value");
      header[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    record.samples.push_back(parse_double(line, file, line_no));
  }

  const auto required = {"mu_true", "gain",        "seed",          "n_samples",
                         "record_index", "noise_sigma", "phase_periods", "n_records"};
  for (const char* key : required) {
    if (!header.count(key))
      throw ParseError(file, 0, std::string("missing header key '") + key + "'");
  }
  for (const auto& [key, value] : header) {
    if (std::find(required.begin(), required.end(), std::string(key)) == required.end())
      throw ParseError(file, 0, "unknown header key '" + key + "'");
  }

  SimulationConfig& c = record.config_echo;
  try {
    c.mu_true = parse_double(header["mu_true"], file, 0);
    c.gain = parse_double(header["gain"], file, 0);
    c.rng_seed = std::stoull(header["seed"]);
    c.n_samples_per_record = std::stoll(header["n_samples"]);
    c.electronic_noise_sigma = parse_double(header["noise_sigma"], file, 0);
    c.phase_periods = parse_double(header["phase_periods"], file, 0);
    c.n_records = std::stoi(header["n_records"]);
    record.record_index = std::stoi(header["record_index"]);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError(file, 0, "malformed header value");
  }

  if (static_cast<std::int64_t>(record.samples.size()) != c.n_samples_per_record)
    throw ParseError(file, line_no,
                     "sample count " + std::to_string(record.samples.size()) +
                         " does not match header n_samples " +
                         std::to_string(c.n_samples_per_record));
  return record;
}

std::vector<std::filesystem::path> write_records(const std::vector<SampleRecord>& records,
                                                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> paths;
  paths.reserve(records.size());
  for (const SampleRecord& record : records) {
    char name[32];
    std::snprintf(name, sizeof(name), "record_%05d.txt", record.record_index);
    paths.push_back(dir / name);
    write_record(record, paths.back());
  }
  return paths;
}

std::vector<SampleRecord> read_records(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw IoError("record directory '" + dir.string() + "' does not exist");
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("record_", 0) == 0 && name.size() > 4 &&
        name.compare(name.size() - 4, 4, ".txt") == 0)
      paths.push_back(entry.path());
  }
  if (paths.empty()) throw IoError("no record files found in '" + dir.string() + "'");
  std::sort(paths.begin(), paths.end());

  std::vector<SampleRecord> records;
  records.reserve(paths.size());
  for (const auto& path : paths) records.push_back(read_record(path));
  return records;
}

}  // namespace prcstomo
