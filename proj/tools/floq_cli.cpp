// Command-line driver: evolve, spectrum, sweep, modes, resonances.
#include "floq/analysis.hpp"
#include "floq/errors.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitPartial = 4;

struct Output {
  const floq::ExperimentConfig& config;

  std::ofstream open(const std::string& name) const {
    std::filesystem::create_directories(config.outdir);
    const auto path = std::filesystem::path(config.outdir) / name;
    {
      std::ofstream meta(path.string() + ".meta");
      meta << "version = " << floq::kVersion << '\n'
           << "config_hash = " << floq::config_hash(config) << '\n'
           << floq::to_text(config);
    }
    std::ofstream out(path);
    if (!out) throw floq::ConfigError("cannot write " + path.string());
    floq::write_metadata(out, config);
    std::cerr << "wrote " << path.string() << '\n';
    return out;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet-Bloch simulator for site-dependently driven lattices"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned jobs = 1;
  std::map<std::string, std::string> overrides;
  app.add_option("--config", config_path, "Config file with key = value lines")
      ->check(CLI::ExistingFile);
  app.add_option("-j,--jobs", jobs, "Worker threads for sweeps and kappa grids");
  for (const auto& key : floq::config_keys()) {
    app.add_option_function<std::string>(
        "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
        "Override config key '" + key + "'");
  }

  auto* evolve = app.add_subcommand("evolve", "Site populations n_s(mT) up to the horizon");
  std::string method = "floquet";
  floq::EvolutionOptions evo;
  evolve->add_option("--method", method, "floquet (mode reconstruction) or direct (split-step)")
      ->check(CLI::IsMember({"floquet", "direct"}));
  evolve->add_option("--keep", evo.keep_modes, "Keep only the N most occupied kappa=0 bands");
  evolve->add_option("--excited", evo.excited_band, "Two-band run with FGS and this band");
  evolve->add_option("--snapshot", evo.snapshots, "Periods at which to write the full state");
  evolve->add_option("--boundary-tolerance", evo.boundary_tolerance,
                     "Allowed relative Gaussian amplitude half a ring away");

  auto* spectrum = app.add_subcommand("spectrum", "Quasienergy spectrum and FGS gap over the omega grid");
  double kappa = 0.0;
  spectrum->add_option("--kappa", kappa, "Quasimomentum");

  auto* sweep = app.add_subcommand("sweep", "n_max, FGS overlap and gap over the omega grid");
  bool refine = false;
  double refine_threshold = 0.45;
  sweep->add_flag("--refine", refine, "Bisect around n_max peaks down to 1e-3");
  sweep->add_option("--refine-threshold", refine_threshold, "Minimum n_max of refined peaks");

  auto* modes = app.add_subcommand("modes", "Floquet-Bloch mode samples at t0");
  modes->add_option("--kappa", kappa, "Quasimomentum (ignored for ring domains)");

  auto* resonances = app.add_subcommand("resonances", "Predicted resonances vs detected overlap dips");
  std::string sweep_csv;
  int alpha_max = 20, folds_max = 2;
  double prominence = 0.0;
  resonances->add_option("--sweep-csv", sweep_csv, "Existing sweep CSV (otherwise a sweep is run)")
      ->check(CLI::ExistingFile);
  resonances->add_option("--alpha-max", alpha_max, "Largest band index");
  resonances->add_option("--folds", folds_max, "Largest fold count n");
  resonances->add_option("--prominence", prominence, "Minimum dip prominence");

  CLI11_PARSE(app, argc, argv);

  try {
    floq::ExperimentConfig config;
    if (!config_path.empty()) config = floq::load_config(config_path);
    for (const auto& key : floq::config_keys()) {
      if (auto it = overrides.find(key); it != overrides.end()) floq::apply_setting(config, key, it->second);
    }
    config.workers = std::max(1u, jobs);
    config.validate();
    const Output output{config};

    if (*evolve) {
      evo.method = method == "direct" ? floq::EvolutionMethod::direct : floq::EvolutionMethod::floquet;
      const auto result = floq::run_evolution(config, evo);
      auto out = output.open("evolve.csv");
      floq::write_evolution_csv(out, result.trace, config.lattice);
      if (!evo.snapshots.empty()) {
        auto snap = output.open("snapshots.csv");
        snap << "m,x,re_psi,im_psi\n";
        for (const auto& [m, state] : result.snapshots) {
          for (floq::Index j = 0; j < state.size(); ++j) {
            snap << m << ',' << floq::format_real(static_cast<double>(j) * state.spacing) << ','
                 << floq::format_real(state.amplitudes[j].real()) << ','
                 << floq::format_real(state.amplitudes[j].imag()) << '\n';
          }
        }
      }
      if (result.ambiguous_bands) std::cerr << "warning: band tracking ambiguous at some kappa\n";
      std::cerr << "decomposition residual " << result.residual << '\n';
    } else if (*spectrum) {
      const auto bands = floq::band_continuation(config.lattice, config.omega_grid.values(), kappa,
                                                 config.solve_options());
      auto out = output.open("spectrum.csv");
      floq::write_spectrum_csv(out, bands);
      auto cross = output.open("crossings.csv");
      floq::write_crossings_csv(cross, bands);
      std::size_t failed = 0;
      for (const auto& p : bands.points) {
        if (p.error) {
          ++failed;
          std::cerr << "omega " << p.omega << " failed: " << *p.error << '\n';
        }
      }
      if (failed > 0) return kExitPartial;
    } else if (*sweep) {
      floq::SweepOptions opts;
      opts.refine_peaks = refine;
      opts.refine_threshold = refine_threshold;
      const auto result = floq::run_sweep(config, opts);
      auto out = output.open("sweep.csv");
      floq::write_sweep_csv(out, result);
      if (refine) {
        auto ref = output.open("sweep_refined.csv");
        floq::write_sweep_csv(ref, result, true);
      }
      for (const auto& r : result.records) {
        if (!r.ok()) std::cerr << "omega " << r.omega << " failed: " << *r.error << '\n';
      }
      if (result.failures() > 0) return kExitPartial;
    } else if (*modes) {
      std::vector<floq::FloquetSpectrum> spectra;
      if (config.domain == floq::DomainKind::ring) {
        const auto opts = config.solve_options();
        const floq::RingDomain ring(
            floq::SupercellGrid(config.lattice, opts.resolved_points(config.lattice)),
            config.supercells);
        spectra = floq::solve_ring_spectra(config.lattice, ring, opts).spectra;
      } else {
        const auto opts = config.solve_options();
        const auto points = opts.resolved_points(config.lattice);
        spectra.push_back(floq::label_by_overlap(
            floq::solve_floquet(config.lattice, points, kappa,
                                opts.params_for(config.lattice.frequency), config.basis),
            floq::uniform_reference(config.lattice, points, kappa)));
      }
      auto out = output.open("modes.csv");
      floq::write_modes_csv(out, spectra);
    } else if (*resonances) {
      floq::SweepResult data;
      if (!sweep_csv.empty()) {
        std::ifstream in(sweep_csv);
        data = floq::read_sweep_csv(in);
      } else {
        data = floq::run_overlap_sweep(config);
        auto out = output.open("sweep.csv");
        floq::write_sweep_csv(out, data);
      }
      const auto rows = floq::report_resonances(config.lattice, data, alpha_max, folds_max, prominence);
      auto out = output.open("resonances.csv");
      floq::write_resonances_csv(out, rows);
    }
  } catch (const floq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const floq::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
