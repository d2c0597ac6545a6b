#include "floq/dynamics.hpp"

#include "floq/errors.hpp"
#include "floq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace floq {

namespace {

// Periodic parts exp(-i kappa x) Phi(x) of all modes as matrix columns.
CMatrix periodic_parts(const FloquetSpectrum& spectrum) {
  const Index n = spectrum.modes.front().samples.size();
  const double dx = spectrum.modes.front().samples.spacing;
  CVector untwist(n);
  for (Index j = 0; j < n; ++j) untwist[j] = std::polar(1.0, -spectrum.kappa * dx * j);
  CMatrix out(n, static_cast<Index>(spectrum.modes.size()));
  for (std::size_t a = 0; a < spectrum.modes.size(); ++a) {
    out.col(static_cast<Index>(a)) = spectrum.modes[a].samples.amplitudes.cwiseProduct(untwist);
  }
  return out;
}

CMatrix mode_matrix(const FloquetSpectrum& spectrum) {
  const Index n = spectrum.modes.front().samples.size();
  CMatrix out(n, static_cast<Index>(spectrum.modes.size()));
  for (std::size_t a = 0; a < spectrum.modes.size(); ++a) {
    out.col(static_cast<Index>(a)) = spectrum.modes[a].samples.amplitudes;
  }
  return out;
}

// Bloch components psi_j(x) = M^{-1/2} sum_c exp(-i 2 pi j c / M) psi_c(x),
// one column per quasimomentum index j.
CMatrix bloch_components(const ComplexState& state, Index cells, Index points) {
  CMatrix out = CMatrix::Zero(points, cells);
  const double norm = 1.0 / std::sqrt(static_cast<double>(cells));
  for (Index j = 0; j < cells; ++j) {
    for (Index c = 0; c < cells; ++c) {
      const Complex phase = std::polar(norm, -2.0 * kPi * static_cast<double>((j * c) % cells) /
                                                 static_cast<double>(cells));
      out.col(j) += phase * state.amplitudes.segment(c * points, points);
    }
  }
  return out;
}

}  // namespace

std::pair<FloquetSpectrum, std::vector<Index>> match_bands(const FloquetSpectrum& reference,
                                                           FloquetSpectrum spectrum) {
  const std::size_t count = std::min(reference.modes.size(), spectrum.modes.size());
  const double dx = spectrum.modes.front().samples.spacing;
  const RMatrix overlap =
      (periodic_parts(reference).adjoint() * periodic_parts(spectrum) * dx).cwiseAbs2();
  std::vector<bool> taken(spectrum.modes.size(), false);
  std::vector<std::size_t> pick;
  std::vector<Index> ambiguous;
  for (std::size_t a = 0; a < count; ++a) {
    double best = -1.0, second = -1.0;
    std::size_t arg = 0;
    for (std::size_t b = 0; b < spectrum.modes.size(); ++b) {
      if (taken[b]) continue;
      const double w = overlap(static_cast<Index>(a), static_cast<Index>(b));
      if (w > best) {
        second = best;
        best = w;
        arg = b;
      } else if (w > second) {
        second = w;
      }
    }
    taken[arg] = true;
    pick.push_back(arg);
    if (second >= 0.0 && best - second < 1e-3) ambiguous.push_back(static_cast<Index>(a));
  }
  for (std::size_t b = 0; b < spectrum.modes.size(); ++b) {
    if (!taken[b]) pick.push_back(b);
  }
  std::vector<FloquetMode> sorted;
  sorted.reserve(pick.size());
  for (std::size_t i = 0; i < pick.size(); ++i) {
    sorted.push_back(std::move(spectrum.modes[pick[i]]));
    sorted.back().label = static_cast<Index>(i);
  }
  spectrum.modes = std::move(sorted);
  spectrum.near_degenerate.clear();
  return {std::move(spectrum), std::move(ambiguous)};
}

RingSpectra solve_ring_spectra(const LatticeSpec& spec, const RingDomain& ring,
                               const FloquetSolveOptions& options) {
  const Index points = ring.cell().size();
  RingSpectra out;
  out.spec = spec;
  out.supercells = ring.supercells();
  out.cell_points = points;
  out.kappas = ring.kappas();
  const PropagationParams params = options.params_for(spec.frequency);
  out.spectra = parallel_map(out.kappas.size(), options.workers, [&](std::size_t j) {
    return solve_floquet(spec, points, out.kappas[j], params, options.basis_size);
  });
  out.spectra[0] = label_by_overlap(std::move(out.spectra[0]), uniform_reference(spec, points));
  for (std::size_t j = 1; j < out.spectra.size(); ++j) {
    auto [matched, ambiguous] = match_bands(out.spectra[0], std::move(out.spectra[j]));
    out.spectra[j] = std::move(matched);
    for (Index band : ambiguous) out.ambiguous.emplace_back(static_cast<Index>(j), band);
  }
  return out;
}

SpectralDecomposition decompose(const ComplexState& initial,
                                std::shared_ptr<const RingSpectra> spectra, double max_residual) {
  const RingSpectra& rs = *spectra;
  const Index cells = rs.supercells;
  const Index points = rs.cell_points;
  if (initial.size() != cells * points) {
    throw ConfigError("initial state does not live on the ring of the spectra");
  }
  if (static_cast<Index>(rs.spectra.size()) != cells) {
    throw ConfigError("spectra missing for some quasimomenta of the ring");
  }
  const CMatrix bloch = bloch_components(initial, cells, points);
  const Index modes = static_cast<Index>(rs.spectra.front().modes.size());
  SpectralDecomposition dec;
  dec.spectra = std::move(spectra);
  dec.coefficients.resize(modes, cells);
  for (Index j = 0; j < cells; ++j) {
    const auto& s = rs.spectra[static_cast<std::size_t>(j)];
    if (static_cast<Index>(s.modes.size()) != modes) {
      throw ConfigError("spectra have different basis sizes across kappa");
    }
    dec.coefficients.col(j) = mode_matrix(s).adjoint() * bloch.col(j) * initial.spacing;
  }
  dec.input_norm_squared = initial.norm_squared();
  dec.residual = 1.0 - dec.coefficients.squaredNorm() / dec.input_norm_squared;
  if (dec.residual > max_residual) {
    throw NumericalError("decomposition residual " + std::to_string(dec.residual) +
                         " exceeds " + std::to_string(max_residual) + "; basis too small");
  }
  return dec;
}

ComplexState stroboscopic_evolve(const SpectralDecomposition& dec, long periods) {
  if (periods < 0) throw ConfigError("period count must be >= 0");
  const RingSpectra& rs = *dec.spectra;
  const Index cells = rs.supercells;
  const Index points = rs.cell_points;
  const double elapsed = static_cast<double>(periods) * rs.spec.period() / rs.spec.hbar;
  CMatrix bloch(points, cells);
  for (Index j = 0; j < cells; ++j) {
    const auto& s = rs.spectra[static_cast<std::size_t>(j)];
    CVector c = dec.coefficients.col(j);
    for (Index a = 0; a < c.size(); ++a) {
      c[a] *= std::polar(1.0, -s.modes[static_cast<std::size_t>(a)].quasienergy * elapsed);
    }
    bloch.col(j) = mode_matrix(s) * c;
  }
  ComplexState out{CVector::Zero(cells * points), rs.spectra.front().modes.front().samples.spacing};
  const double norm = 1.0 / std::sqrt(static_cast<double>(cells));
  for (Index c = 0; c < cells; ++c) {
    auto segment = out.amplitudes.segment(c * points, points);
    for (Index j = 0; j < cells; ++j) {
      const Complex phase = std::polar(norm, 2.0 * kPi * static_cast<double>((j * c) % cells) /
                                                 static_cast<double>(cells));
      segment += phase * bloch.col(j);
    }
  }
  return out;
}

SpectralDecomposition truncate_modes(SpectralDecomposition dec, Index keep) {
  if (keep < 1) throw ConfigError("must keep at least one mode");
  if (keep < dec.modes()) dec.coefficients.bottomRows(dec.modes() - keep).setZero();
  return dec;
}

SpectralDecomposition keep_bands(SpectralDecomposition dec, const std::vector<Index>& bands) {
  for (Index a = 0; a < dec.modes(); ++a) {
    if (std::find(bands.begin(), bands.end(), a) == bands.end()) dec.coefficients.row(a).setZero();
  }
  return dec;
}

ComplexState two_band_reconstruct(const SpectralDecomposition& dec, Index excited, long periods) {
  if (excited < 1 || excited >= dec.modes()) throw ConfigError("excited band out of range");
  return stroboscopic_evolve(keep_bands(dec, {0, excited}), periods);
}

bool bands_ambiguous(const RingSpectra& spectra, const std::vector<Index>& bands) {
  return std::any_of(spectra.ambiguous.begin(), spectra.ambiguous.end(), [&](const auto& p) {
    return std::find(bands.begin(), bands.end(), p.second) != bands.end();
  });
}

RVector site_populations(const ComplexState& state, const LatticeSpec& spec,
                         bool require_aligned) {
  return site_probabilities(state, spec, require_aligned);
}

PopulationTrace population_trace(const SpectralDecomposition& dec, long horizon) {
  if (horizon < 0) throw ConfigError("horizon must be >= 0");
  PopulationTrace out;
  const LatticeSpec& spec = dec.spectra->spec;
  for (long m = 0; m <= horizon; ++m) {
    const RVector row = site_populations(stroboscopic_evolve(dec, m), spec);
    if (m == 0) out.populations.resize(horizon + 1, row.size());
    out.populations.row(m) = row.transpose();
    out.periods.push_back(m);
  }
  return out;
}

PopulationTrace direct_population_trace(const ComplexState& initial, const LatticeSpec& spec,
                                        const PropagationParams& params, long horizon) {
  if (horizon < 0) throw ConfigError("horizon must be >= 0");
  const Index points = points_per_cell_of(initial, spec);
  SplitStepPropagator prop(spec, points, initial.size() / points, 0.0, params);
  PopulationTrace out;
  ComplexState state = initial;
  for (long m = 0; m <= horizon; ++m) {
    if (m > 0) {
      state = prop.advance(state, params.start_time + static_cast<double>(m - 1) * spec.period(),
                           spec.period());
    }
    const RVector row = site_populations(state, spec);
    if (m == 0) out.populations.resize(horizon + 1, row.size());
    out.populations.row(m) = row.transpose();
    out.periods.push_back(m);
  }
  return out;
}

double interference_period(double eps_a, double eps_b, double omega, double hbar) {
  const double hw = hbar * omega;
  const double gap = quasienergy_distance(eps_a, eps_b, hw);
  if (gap <= 1e-14 * hw) throw DegeneratePairError("degenerate quasienergies: infinite period");
  return hw / gap;
}

double peak_to_peak(const PopulationTrace& trace, Index site, long first, long last) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t r = 0; r < trace.periods.size(); ++r) {
    const long m = trace.periods[r];
    if (m < first || m > last) continue;
    const double v = trace.populations(static_cast<Index>(r), site);
    lo = any ? std::min(lo, v) : v;
    hi = any ? std::max(hi, v) : v;
    any = true;
  }
  if (!any) throw ConfigError("no samples in the requested window");
  return hi - lo;
}

double dominant_period(const RVector& series) {
  const Index n = series.size();
  if (n < 8) throw ConfigError("series too short for a period estimate");
  const RVector centered = series.array() - series.mean();
  RVector windowed(n);
  for (Index i = 0; i < n; ++i) {
    windowed[i] = centered[i] * (0.5 - 0.5 * std::cos(2.0 * kPi * i / static_cast<double>(n - 1)));
  }
  auto power = [&](double f) {
    Complex acc{0.0, 0.0};
    for (Index i = 0; i < n; ++i) acc += windowed[i] * std::polar(1.0, -2.0 * kPi * f * i);
    return std::norm(acc);
  };
  // Coarse scan at 1/(8n) resolution, skipping the lowest bin (window leakage of the mean).
  const double step = 1.0 / (8.0 * static_cast<double>(n));
  double best_f = 0.0, best_p = -1.0;
  for (double f = 2.0 / static_cast<double>(n); f <= 0.5; f += step) {
    const double p = power(f);
    if (p > best_p) {
      best_p = p;
      best_f = f;
    }
  }
  // Golden-section polish within one coarse step.
  double a = best_f - step, b = best_f + step;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double pc = power(c), pd = power(d);
  for (int it = 0; it < 60; ++it) {
    if (pc > pd) {
      b = d, d = c, pd = pc, c = b - r * (b - a), pc = power(c);
    } else {
      a = c, c = d, pc = pd, d = a + r * (b - a), pd = power(d);
    }
  }
  return 2.0 / (a + b);
}

std::vector<Index> central_sites(const LatticeSpec& spec, Index supercells, double center) {
  const Index np = spec.sites_per_cell;
  const Index total = supercells * np;
  const double length = static_cast<double>(supercells) * spec.cell_length();
  Index best_group = 0;
  double best = length;
  for (Index g = 0; g < supercells; ++g) {
    // Sites g*np .. g*np + np - 1 span [(g*np - 1) L, (g*np + np - 1) L).
    const double mid = (static_cast<double>(g * np) - 1.0 + 0.5 * np) * spec.spacing;
    const double d = std::abs(std::remainder(mid - center, length));
    if (d < best - 1e-12) {
      best = d;
      best_group = g;
    }
  }
  std::vector<Index> out;
  for (Index i = 0; i < np; ++i) out.push_back((best_group * np + i) % total);
  return out;
}

}  // namespace floq
