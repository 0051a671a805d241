#include <cstdint>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prcstomo/errors.hpp"
#include "prcstomo/pipeline.hpp"

namespace {

std::vector<double> parse_mu_list(const std::string& list) {
  std::vector<double> mus;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      mus.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw prcstomo::ValidationError("--mu: bad value '" + item + "'");
    }
  }
  if (mus.empty()) throw prcstomo::ValidationError("--mu: empty list");
  return mus;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-photon tomography via phase-randomized coherent states"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string mu_list;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool theoretical = false;
  int records = 0;
  std::int64_t samples = 0;
  int bins = 0;
  double noise = -1.0;

  app.add_option("--config", config_path, "pipeline config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "RNG seed")->each([&](const std::string&) { seed_set = true; });
  app.add_flag("--theoretical", theoretical, "use exact marginals, no sampling");
  app.add_option("--mu", mu_list, "comma-separated non-zero mean photon numbers");
  app.add_option("--records", records, "records per channel");
  app.add_option("--samples", samples, "samples per record");
  app.add_option("--bins", bins, "histogram bins");
  app.add_option("--noise", noise, "electronic noise sigma (quadrature units)");

  for (const char* name : {"simulate", "calibrate", "fit-mu", "estimate", "reconstruct",
                           "report", "run"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    prcstomo::PipelineConfig config;
    if (!config_path.empty()) config = prcstomo::load_config(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed_set) config.seed = seed;
    if (theoretical) config.theoretical = true;
    if (records > 0) config.n_records = records;
    if (samples > 0) config.samples_per_record = samples;
    if (bins > 0) config.n_bins = bins;
    if (noise >= 0.0) config.noise_sigma = noise;
    if (!mu_list.empty()) {
      config.channels.clear();
      config.channels.push_back({0.0, {}});
      for (double mu : parse_mu_list(mu_list)) config.channels.push_back({mu, {}});
    }

    const std::string stage = app.get_subcommands().front()->get_name();
    if (stage == "simulate") prcstomo::stage_simulate(config);
    else if (stage == "calibrate") prcstomo::stage_calibrate(config);
    else if (stage == "fit-mu") prcstomo::stage_fit_mu(config);
    else if (stage == "estimate") prcstomo::stage_estimate(config);
    else if (stage == "reconstruct") prcstomo::stage_reconstruct(config);
    else if (stage == "report") prcstomo::stage_report(config);
    else prcstomo::run(config);
  } catch (const prcstomo::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const prcstomo::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 2;
  } catch (const prcstomo::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
