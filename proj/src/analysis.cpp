#include "floq/analysis.hpp"

#include "floq/errors.hpp"
#include "floq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <string>

namespace floq {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t SweepResult::failures() const {
  auto failed = [](const SweepRecord& r) { return !r.ok(); };
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), failed) +
                                  std::count_if(refined.begin(), refined.end(), failed));
}

SweepRecord sweep_point(const ExperimentConfig& config, double omega) {
  SweepRecord rec;
  rec.omega = omega;
  try {
    const LatticeSpec spec = config.lattice.with_frequency(omega);
    const FloquetSolveOptions opts = config.solve_options();
    const Index points = opts.resolved_points(spec);
    const ComplexState reference = uniform_reference(spec, points);
    FloquetSpectrum spectrum = label_by_overlap(
        diagonalize(build_monodromy(spec, points, 0.0, opts.params_for(omega)), kAllModes),
        reference);

    const auto& modes = spectrum.modes;
    rec.overlap = std::norm(inner(modes.front().samples, reference));
    rec.eps_fgs = modes.front().quasienergy;

    // Gap over the converged (lowest mean kinetic energy) modes only.
    std::vector<double> kinetic;
    for (const auto& m : modes) kinetic.push_back(m.mean_kinetic);
    const std::size_t converged =
        config.basis == kAllModes ? kinetic.size()
                                  : std::min<std::size_t>(kinetic.size(), config.basis);
    std::nth_element(kinetic.begin(), kinetic.begin() + (converged - 1), kinetic.end());
    const double cutoff = kinetic[converged - 1];
    const double hw = spec.hbar * omega;
    rec.gap = hw;
    for (std::size_t b = 1; b < modes.size(); ++b) {
      if (modes[b].mean_kinetic > cutoff) continue;
      rec.gap = std::min(rec.gap, quasienergy_distance(modes[b].quasienergy, rec.eps_fgs, hw));
    }

    auto rs = std::make_shared<RingSpectra>();
    rs->spec = spec;
    rs->supercells = 1;
    rs->cell_points = points;
    rs->kappas = {0.0};
    rs->spectra.push_back(std::move(spectrum));
    const RingDomain ring(SupercellGrid(spec, points), 1);
    const SpectralDecomposition dec =
        decompose(make_initial_state(InitialStateSpec::uniform(), ring), rs);
    const PopulationTrace trace = population_trace(dec, config.horizon);
    Index row = 0, col = 0;
    rec.n_max = trace.populations.maxCoeff(&row, &col);
    rec.argmax_site = col;
    rec.argmax_period = trace.periods[static_cast<std::size_t>(row)];
  } catch (const NumericalError& e) {
    rec.error = e.what();
  }
  return rec;
}

namespace {

std::vector<std::size_t> ok_indices(const std::vector<SweepRecord>& records) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].ok()) out.push_back(i);
  }
  return out;
}

// Interior local minima of y with topographic prominence >= min_prominence,
// located by parabolic refinement.
std::vector<CrossingCandidate> prominent_minima(const std::vector<double>& x,
                                                const std::vector<double>& y,
                                                double min_prominence) {
  std::vector<CrossingCandidate> out;
  for (auto cand : local_minima(x, y)) {
    const auto i = static_cast<std::size_t>(cand.grid_index);
    double left = y[i], right = y[i];
    for (std::size_t j = i; j-- > 0 && y[j] >= y[i];) left = std::max(left, y[j]);
    for (std::size_t j = i + 1; j < y.size() && y[j] >= y[i]; ++j) right = std::max(right, y[j]);
    if (std::min(left, right) - y[i] >= min_prominence) out.push_back(cand);
  }
  return out;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
  config.validate();
  const std::vector<double> omegas = config.omega_grid.values();
  SweepResult out;
  out.records = parallel_map(omegas.size(), config.workers,
                             [&](std::size_t i) { return sweep_point(config, omegas[i]); });
  if (!options.refine_peaks) return out;

  std::map<double, SweepRecord> extra;
  for (const auto& peak : nmax_peaks(out, options.refine_threshold)) {
    const auto i = static_cast<std::size_t>(peak.grid_index);
    double center = out.records[i].omega;
    double best = out.records[i].n_max;
    double h = config.omega_grid.step;
    while (0.5 * h >= options.refine_step * (1.0 - 1e-9)) {
      h *= 0.5;
      const double base = center;
      for (double w : {base - h, base + h}) {
        auto it = extra.find(w);
        if (it == extra.end()) it = extra.emplace(w, sweep_point(config, w)).first;
        if (it->second.ok() && it->second.n_max > best) {
          best = it->second.n_max;
          center = w;
        }
      }
    }
  }
  for (auto& [w, rec] : extra) out.refined.push_back(std::move(rec));
  return out;
}

SweepResult run_nmax_sweep(const ExperimentConfig& config) {
  SweepOptions o;
  o.refine_peaks = true;
  return run_sweep(config, o);
}

SweepResult run_overlap_sweep(const ExperimentConfig& config) { return run_sweep(config, {}); }

std::vector<CrossingCandidate> overlap_dips(const SweepResult& sweep, double min_prominence) {
  std::vector<double> x, y;
  const auto idx = ok_indices(sweep.records);
  for (auto i : idx) {
    x.push_back(sweep.records[i].omega);
    y.push_back(sweep.records[i].overlap);
  }
  auto out = prominent_minima(x, y, min_prominence);
  for (auto& c : out) c.grid_index = static_cast<Index>(idx[static_cast<std::size_t>(c.grid_index)]);
  return out;
}

std::vector<CrossingCandidate> nmax_peaks(const SweepResult& sweep, double min_value) {
  std::vector<double> x, y;
  const auto idx = ok_indices(sweep.records);
  for (auto i : idx) {
    x.push_back(sweep.records[i].omega);
    y.push_back(-sweep.records[i].n_max);
  }
  std::vector<CrossingCandidate> out;
  for (auto c : local_minima(x, y)) {
    const std::size_t record = idx[static_cast<std::size_t>(c.grid_index)];
    if (sweep.records[record].n_max < min_value) continue;
    c.gap = -c.gap;
    c.grid_index = static_cast<Index>(record);
    out.push_back(c);
  }
  return out;
}

namespace {

void record_row(PopulationTrace& trace, long m, const RVector& row, long horizon) {
  if (trace.periods.empty()) trace.populations.resize(horizon + 1, row.size());
  trace.populations.row(static_cast<Index>(trace.periods.size())) = row.transpose();
  trace.periods.push_back(m);
}

bool wants_snapshot(const EvolutionOptions& o, long m) {
  return std::find(o.snapshots.begin(), o.snapshots.end(), m) != o.snapshots.end();
}

}  // namespace

EvolutionResult run_evolution(const ExperimentConfig& config, const EvolutionOptions& options) {
  config.validate();
  const LatticeSpec& spec = config.lattice;
  const FloquetSolveOptions opts = config.solve_options();
  const RingDomain ring(SupercellGrid(spec, opts.resolved_points(spec)), config.supercell_count());
  const ComplexState initial = make_initial_state(config.initial, ring, options.boundary_tolerance);
  EvolutionResult out;

  if (options.method == EvolutionMethod::direct) {
    if (options.keep_modes > 0 || options.excited_band > 0) {
      throw ConfigError("mode truncation needs the Floquet method");
    }
    const PropagationParams params = config.propagation();
    SplitStepPropagator prop(spec, ring.cell().size(), ring.supercells(), 0.0, params);
    ComplexState state = initial;
    for (long m = 0; m <= config.horizon; ++m) {
      if (m > 0) {
        state = prop.advance(state, params.start_time + static_cast<double>(m - 1) * spec.period(),
                             spec.period());
      }
      record_row(out.trace, m, site_populations(state, spec), config.horizon);
      if (wants_snapshot(options, m)) out.snapshots.emplace_back(m, state);
    }
    return out;
  }

  auto spectra = std::make_shared<const RingSpectra>(solve_ring_spectra(spec, ring, opts));
  SpectralDecomposition dec = decompose(initial, spectra);
  out.residual = dec.residual;
  if (options.keep_modes > 0) dec = truncate_modes(std::move(dec), options.keep_modes);
  if (options.excited_band > 0) {
    if (options.excited_band >= dec.modes()) throw ConfigError("excited band out of range");
    dec = keep_bands(std::move(dec), {0, options.excited_band});
    out.ambiguous_bands = bands_ambiguous(*spectra, {0, options.excited_band});
  }
  for (long m = 0; m <= config.horizon; ++m) {
    const ComplexState state = stroboscopic_evolve(dec, m);
    record_row(out.trace, m, site_populations(state, spec), config.horizon);
    if (wants_snapshot(options, m)) out.snapshots.emplace_back(m, state);
  }
  return out;
}

std::vector<ResonanceRow> report_resonances(const LatticeSpec& spec, const SweepResult& sweep,
                                            int alpha_max, int folds_max, double min_prominence) {
  const auto idx = ok_indices(sweep.records);
  if (idx.empty()) throw ConfigError("no sweep data to compare resonances against");
  const double lo = sweep.records[idx.front()].omega;
  const double hi = sweep.records[idx.back()].omega;
  const auto dips = overlap_dips(sweep, min_prominence);
  std::vector<ResonanceRow> out;
  for (const auto& p : predict_resonances(spec, alpha_max, folds_max)) {
    if (p.omega < lo || p.omega > hi) continue;
    ResonanceRow row{p.alpha, p.folds, p.omega, std::nullopt, std::nullopt};
    double best = std::numeric_limits<double>::infinity();
    for (const auto& d : dips) {
      if (std::abs(d.omega - p.omega) < best) {
        best = std::abs(d.omega - p.omega);
        row.nearest_dip = d.omega;
        row.residual = d.omega - p.omega;
      }
    }
    out.push_back(row);
  }
  return out;
}

void write_metadata(std::ostream& out, const ExperimentConfig& config) {
  out << "# floq " << kVersion << '\n' << "# config_hash " << config_hash(config) << '\n';
  const std::string text = to_text(config);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    out << "# " << text.substr(pos, nl - pos) << '\n';
    pos = nl + 1;
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep, bool refined) {
  out << "omega,n_max,argmax_site,argmax_m,overlap,eps_fgs,gap\n";
  for (const auto& r : refined ? sweep.refined : sweep.records) {
    if (!r.ok()) {
      out << format_real(r.omega) << ",nan,-1,-1,nan,nan,nan\n";
      continue;
    }
    out << format_real(r.omega) << ',' << format_real(r.n_max) << ',' << r.argmax_site << ','
        << r.argmax_period << ',' << format_real(r.overlap) << ',' << format_real(r.eps_fgs) << ','
        << format_real(r.gap) << '\n';
  }
}

void write_evolution_csv(std::ostream& out, const PopulationTrace& trace, const LatticeSpec& spec) {
  out << "m,t,s,n_s\n";
  for (std::size_t r = 0; r < trace.periods.size(); ++r) {
    const long m = trace.periods[r];
    const std::string t = format_real(static_cast<double>(m) * spec.period());
    for (Index s = 0; s < trace.sites(); ++s) {
      out << m << ',' << t << ',' << s << ','
          << format_real(trace.populations(static_cast<Index>(r), s)) << '\n';
    }
  }
}

void write_modes_csv(std::ostream& out, const std::vector<FloquetSpectrum>& spectra) {
  out << "kappa,alpha,eps,x,re_phi,im_phi\n";
  for (const auto& s : spectra) {
    for (const auto& mode : s.modes) {
      const std::string prefix =
          format_real(s.kappa) + ',' + std::to_string(mode.label) + ',' + format_real(mode.quasienergy);
      for (Index j = 0; j < mode.samples.size(); ++j) {
        const Complex v = mode.samples.amplitudes[j];
        out << prefix << ',' << format_real(static_cast<double>(j) * mode.samples.spacing) << ','
            << format_real(v.real()) << ',' << format_real(v.imag()) << '\n';
      }
    }
  }
}

void write_resonances_csv(std::ostream& out, const std::vector<ResonanceRow>& rows) {
  out << "alpha,n,omega_res,nearest_dip,residual\n";
  for (const auto& r : rows) {
    out << r.alpha << ',' << r.folds << ',' << format_real(r.omega_res) << ','
        << (r.nearest_dip ? format_real(*r.nearest_dip) : "nan") << ','
        << (r.residual ? format_real(*r.residual) : "nan") << '\n';
  }
}

void write_spectrum_csv(std::ostream& out, const BandContinuation& bands) {
  out << "omega,alpha,eps,overlap,mean_kinetic\n";
  for (const auto& p : bands.points) {
    if (p.error) continue;
    const auto& s = p.spectrum;
    const ComplexState ref = uniform_reference(s.spec, s.modes.front().samples.size(), s.kappa);
    const auto w = overlap_weights(s, ref);
    for (std::size_t a = 0; a < s.modes.size(); ++a) {
      out << format_real(p.omega) << ',' << a << ',' << format_real(s.modes[a].quasienergy) << ','
          << format_real(w[a]) << ',' << format_real(s.modes[a].mean_kinetic) << '\n';
    }
  }
}

void write_crossings_csv(std::ostream& out, const BandContinuation& bands) {
  out << "omega,gap,grid_index\n";
  for (const auto& c : bands.candidates) {
    out << format_real(c.omega) << ',' << format_real(c.gap) << ',' << c.grid_index << '\n';
  }
}

SweepResult read_sweep_csv(std::istream& in) {
  SweepResult out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line.rfind("omega,n_max", 0) != 0) throw ConfigError("not a sweep CSV: " + line);
      header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 7) throw ConfigError("malformed sweep row: " + line);
    SweepRecord r;
    r.omega = parse_real(fields[0]);
    if (fields[1] == "nan") {
      r.error = "failed";
    } else {
      r.n_max = parse_real(fields[1]);
      r.argmax_site = std::stol(fields[2]);
      r.argmax_period = std::stol(fields[3]);
      r.overlap = parse_real(fields[4]);
      r.eps_fgs = parse_real(fields[5]);
      r.gap = parse_real(fields[6]);
    }
    out.records.push_back(std::move(r));
  }
  if (!header) throw ConfigError("sweep CSV has no header row");
  return out;
}

}  // namespace floq
