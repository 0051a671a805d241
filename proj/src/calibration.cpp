#include "prcstomo/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <string>

#include "prcstomo/errors.hpp"

namespace prcstomo {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct BinnedMoments {
  double mean = 0.0;
  double variance = 0.0;  // Sheppard-corrected
};

BinnedMoments binned_moments(std::span<const double> centers, std::span<const double> weights,
                             double bin_width) {
  double total = 0.0;
  double first = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    total += weights[i];
    first += weights[i] * centers[i];
  }
  BinnedMoments m;
  m.mean = first / total;
  double second = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double d = centers[i] - m.mean;
    second += weights[i] * d * d;
  }
  m.variance = second / total - bin_width * bin_width / 12.0;
  return m;
}

// Brent-style scalar minimization on [lo, hi]: golden sections with
// parabolic interpolation where it helps. rel_tol acts on the abscissa.
double minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                       double rel_tol, int max_iter) {
  constexpr double golden = 0.3819660112501051;  // 2 - phi
  double a = lo, b = hi;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  for (int iter = 0; iter < max_iter; ++iter) {
    const double mid = 0.5 * (a + b);
    const double tol1 = rel_tol * std::abs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) return x;

    bool use_golden = true;
    if (std::abs(e) > tol1) {
      // trial parabola through x, v, w
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = mid > x ? tol1 : -tol1;
        use_golden = false;
      }
    }
    if (use_golden) {
      e = (x < mid ? b : a) - x;
      d = golden * e;
    }

    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  throw FitError("scalar minimization did not converge");
}

}  // namespace

double RawHistogram::bin_width() const {
  return (hi - lo) / static_cast<double>(counts.size());
}

double RawHistogram::bin_center(std::size_t i) const {
  return lo + (static_cast<double>(i) + 0.5) * bin_width();
}

double RawHistogram::total_count() const {
  double total = 0.0;
  for (double c : counts) total += c;
  return total;
}

double RawHistogram::mean() const {
  std::vector<double> centers(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) centers[i] = bin_center(i);
  return binned_moments(centers, counts, bin_width()).mean;
}

double RawHistogram::variance() const {
  std::vector<double> centers(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) centers[i] = bin_center(i);
  return binned_moments(centers, counts, bin_width()).variance;
}

void RawHistogram::add(double value) {
  if (value < lo || value > hi) {
    ++n_out_of_range;
    return;
  }
  auto bin = static_cast<std::size_t>((value - lo) / bin_width());
  if (bin >= counts.size()) bin = counts.size() - 1;  // closed upper edge
  counts[bin] += 1.0;
}

void RawHistogram::merge(const RawHistogram& other) {
  if (other.lo != lo || other.hi != hi || other.counts.size() != counts.size())
    throw ValidationError("RawHistogram::merge: binning mismatch");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  n_out_of_range += other.n_out_of_range;
}

RawHistogram build_histogram(std::span<const double> samples, int n_bins, double lo, double hi) {
  if (samples.empty()) throw std::domain_error("build_histogram: empty sample set");
  if (n_bins < 2) throw std::domain_error("build_histogram: need at least two bins");
  if (!(lo < hi)) throw std::domain_error("build_histogram: lo must be below hi");
  RawHistogram hist;
  hist.lo = lo;
  hist.hi = hi;
  hist.counts.assign(static_cast<std::size_t>(n_bins), 0.0);
  for (double v : samples) hist.add(v);
  return hist;
}

RawHistogram pool_records(const std::vector<SampleRecord>& records, int n_bins, double lo,
                          double hi) {
  if (records.empty()) throw std::domain_error("pool_records: no records");
  RawHistogram pooled;
  pooled.lo = lo;
  pooled.hi = hi;
  pooled.counts.assign(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<double> centered;
  for (const SampleRecord& record : records) {
    if (record.samples.empty()) throw std::domain_error("pool_records: empty record");
    double mean = 0.0;
    for (double v : record.samples) mean += v;
    mean /= static_cast<double>(record.samples.size());
    centered.resize(record.samples.size());
    for (std::size_t i = 0; i < record.samples.size(); ++i)
      centered[i] = record.samples[i] - mean;
    for (double v : centered) pooled.add(v);
  }
  return pooled;
}

double CalibratedHistogram::mean() const {
  return binned_moments(x_grid, density, delta_x).mean;
}

double CalibratedHistogram::variance() const {
  return binned_moments(x_grid, density, delta_x).variance;
}

MarginalDensity CalibratedHistogram::as_density() const {
  MarginalDensity d;
  d.x_grid = x_grid;
  d.values = density;
  d.grid_step = delta_x;
  return d;
}

std::vector<CalibratedHistogram> calibrate(const RawHistogram& vacuum,
                                           const std::vector<RawHistogram>& signals) {
  for (const RawHistogram& s : signals) {
    if (s.lo != vacuum.lo || s.hi != vacuum.hi || s.counts.size() != vacuum.counts.size())
      throw ValidationError("calibrate: histograms do not share binning");
  }
  if (!(vacuum.total_count() > 0.0)) throw ValidationError("calibrate: empty vacuum histogram");

  const double vacuum_mean = vacuum.mean();
  const double vacuum_variance = vacuum.variance();
  if (!(vacuum_variance > 0.0))
    throw ValidationError("calibrate: vacuum histogram variance is degenerate");
  const double scale = 1.0 / (2.0 * std::sqrt(vacuum_variance));

  std::vector<CalibratedHistogram> out;
  out.reserve(signals.size() + 1);
  auto calibrate_one = [&](const RawHistogram& h) {
    const double total = h.total_count();
    if (!(total > 0.0)) throw ValidationError("calibrate: empty histogram");
    CalibratedHistogram c;
    c.delta_x = h.bin_width() * scale;
    c.n_samples = static_cast<std::int64_t>(std::llround(total));
    c.scale_factor = scale;
    c.x_grid.resize(h.counts.size());
    c.density.resize(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      c.x_grid[i] = (h.bin_center(i) - vacuum_mean) * scale;
      c.density[i] = h.counts[i] / (total * c.delta_x);
    }
    out.push_back(std::move(c));
  };
  calibrate_one(vacuum);
  for (const RawHistogram& s : signals) calibrate_one(s);
  return out;
}

MuEstimate fit_mu(const CalibratedHistogram& hist, const TruncationPolicy& policy) {
  if (hist.x_grid.size() < 8) throw ValidationError("fit_mu: too few bins");

  const auto residual_sum = [&](double mu) {
    double s = 0.0;
    const MarginalDensity model = prcs_marginal(mu, hist.x_grid, policy);
    for (std::size_t i = 0; i < hist.density.size(); ++i) {
      const double r = hist.density[i] - model.values[i];
      s += r * r;
    }
    return s;
  };

  // Moment-based bracket: variance 1/4 + mu/2 puts mu near 2(4v-1)/4; twice
  // that is a generous upper edge, floored for (sub-)vacuum inputs.
  const double variance = hist.variance();
  const double hi = std::max(2.0 * (4.0 * variance - 1.0), 0.1);
  const double mu_hat = minimize_scalar(residual_sum, 0.0, hi, 1e-8, 200);

  MuEstimate est;
  est.mu = mu_hat;
  est.fit_residual = residual_sum(mu_hat);

  // Curvature-based uncertainty: sigma^2 = 2 s^2 / S'' with s^2 the
  // residual mean square.
  const double h = std::max(1e-4 * mu_hat, 1e-5);
  const double center = mu_hat >= h ? mu_hat : h;  // keep the stencil in mu >= 0
  const double s0 = residual_sum(center - h);
  const double s1 = residual_sum(center);
  const double s2 = residual_sum(center + h);
  const double curvature = (s0 - 2.0 * s1 + s2) / (h * h);
  const double dof = static_cast<double>(hist.density.size()) - 1.0;
  if (curvature > 0.0)
    est.sigma = std::sqrt(2.0 * (est.fit_residual / dof) / curvature);
  else
    est.sigma = std::numeric_limits<double>::infinity();

  const double n = static_cast<double>(hist.n_samples);
  const double variance_stat_sigma = variance * std::sqrt(2.0 / std::max(n - 1.0, 1.0));
  est.sub_vacuum = variance < 0.25 - 3.0 * variance_stat_sigma;
  return est;
}

void write_calibrated(const CalibratedHistogram& hist, const std::filesystem::path& path,
                      const std::optional<MuEstimate>& fit) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out << "# mu_hat=" << format_double(fit ? fit->mu : nan) << '\n';
  out << "# sigma_mu=" << format_double(fit ? fit->sigma : nan) << '\n';
  out << "# delta_x=" << format_double(hist.delta_x) << '\n';
  out << "# n_samples=" << hist.n_samples << '\n';
  out << "# scale_factor=" << format_double(hist.scale_factor) << '\n';
  for (std::size_t i = 0; i < hist.x_grid.size(); ++i)
    out << format_double(hist.x_grid[i]) << ',' << format_double(hist.density[i]) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

CalibratedHistogram read_calibrated(const std::filesystem::path& path,
                                    std::optional<MuEstimate>* fit_out) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::string file = path.string();

  CalibratedHistogram hist;
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
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError(file, line_no, "expected 'x,density', got '" + line + "'");
    try {
      hist.x_grid.push_back(std::stod(line.substr(0, comma)));
      hist.density.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError(file, line_no, "malformed number in '" + line + "'");
    }
  }

  for (const char* key : {"mu_hat", "sigma_mu", "delta_x", "n_samples", "scale_factor"}) {
    if (!header.count(key))
      throw ParseError(file, 0, std::string("missing header key '") + key + "'");
  }
  if (hist.x_grid.empty()) throw ParseError(file, 0, "no histogram rows");
  try {
    hist.delta_x = std::stod(header["delta_x"]);
    hist.n_samples = std::stoll(header["n_samples"]);
    hist.scale_factor = std::stod(header["scale_factor"]);

    if (fit_out) {
      const double mu_hat = std::stod(header["mu_hat"]);
      if (std::isnan(mu_hat)) {
        fit_out->reset();
      } else {
        MuEstimate est;
        est.mu = mu_hat;
        est.sigma = std::stod(header["sigma_mu"]);
        *fit_out = est;
      }
    }
  } catch (const std::exception&) {
    throw ParseError(file, 0, "malformed header value");
  }
  return hist;
}

}  // namespace prcstomo
