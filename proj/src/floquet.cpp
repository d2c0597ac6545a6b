#include "floq/floquet.hpp"

#include "fft.hpp"
#include "floq/errors.hpp"
#include "floq/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace floq {

double unitarity_defect(const CMatrix& u) {
  const CMatrix gram = u.adjoint() * u;
  return (gram - CMatrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

Monodromy build_monodromy(const LatticeSpec& spec, Index points, double kappa,
                          const PropagationParams& params) {
  SplitStepPropagator prop(spec, points, 1, kappa, params);
  Monodromy out;
  out.matrix = CMatrix::Identity(points, points);
  prop.advance_momentum(out.matrix, params.start_time, spec.period());
  out.momenta = prop.momenta();
  out.spec = spec;
  out.kappa = kappa;
  out.start_time = params.start_time;
  const double defect = unitarity_defect(out.matrix);
  if (!(defect < kUnitarityTolerance)) {
    throw NumericalError("monodromy not unitary (defect " + std::to_string(defect) +
                         "); propagation is under-resolved");
  }
  return out;
}

Monodromy monodromy_from_matrix(CMatrix matrix, const LatticeSpec& spec, double kappa,
                                double start_time) {
  if (matrix.rows() != matrix.cols()) throw ConfigError("monodromy must be square");
  Monodromy out;
  const Index n = matrix.rows();
  out.matrix = std::move(matrix);
  out.momenta.resize(n);
  for (Index q = 0; q < n; ++q) {
    const Index signed_q = q < n / 2 ? q : q - n;
    out.momenta[q] = 2.0 * kPi * static_cast<double>(signed_q) / spec.cell_length() + kappa;
  }
  out.spec = spec;
  out.kappa = kappa;
  out.start_time = start_time;
  return out;
}

double fold_quasienergy(double energy, double hbar_omega) {
  double e = energy - hbar_omega * std::round(energy / hbar_omega);
  if (e > 0.5 * hbar_omega) e -= hbar_omega;
  if (e < -0.5 * hbar_omega) e += hbar_omega;
  return e;
}

double quasienergy_distance(double a, double b, double hbar_omega) {
  const double d = std::abs(fold_quasienergy(a - b, hbar_omega));
  return std::min(d, hbar_omega - d);
}

FloquetSpectrum diagonalize(const Monodromy& monodromy, Index basis_size) {
  const LatticeSpec& spec = monodromy.spec;
  const Index n = monodromy.dimension();
  if (basis_size == kAllModes) basis_size = n;
  if (basis_size < 1 || basis_size > n) {
    throw ConfigError("basis size " + std::to_string(basis_size) + " outside [1, " +
                      std::to_string(n) + "]");
  }
  Eigen::ComplexSchur<CMatrix> schur(monodromy.matrix, true);
  if (schur.info() != Eigen::Success) throw NumericalError("complex Schur decomposition failed");
  const CMatrix& t = schur.matrixT();
  const CMatrix& q = schur.matrixU();

  const double hw = spec.hbar * spec.frequency;
  const double to_energy = -spec.hbar / spec.period();
  RVector kinetic(n);
  RVector energy(n);
  for (Index i = 0; i < n; ++i) {
    const Complex lambda = t(i, i);
    if (std::abs(std::abs(lambda) - 1.0) > kUnitarityTolerance) {
      throw NumericalError("eigenphase not unimodular: |lambda| = " +
                           std::to_string(std::abs(lambda)));
    }
    energy[i] = fold_quasienergy(to_energy * std::arg(lambda), hw);
    double ek = 0.0;
    for (Index r = 0; r < n; ++r) {
      const double k = monodromy.momenta[r];
      ek += std::norm(q(r, i)) * spec.hbar * spec.hbar * k * k / (2.0 * spec.mass);
    }
    kinetic[i] = ek;
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (kinetic[a] != kinetic[b]) return kinetic[a] < kinetic[b];
    return energy[a] < energy[b];
  });
  order.resize(static_cast<std::size_t>(basis_size));

  FloquetSpectrum out;
  out.spec = spec;
  out.kappa = monodromy.kappa;
  out.start_time = monodromy.start_time;
  out.basis_size = basis_size;
  out.modes.reserve(order.size());

  const double dx = spec.cell_length() / static_cast<double>(n);
  const double scale = 1.0 / std::sqrt(spec.cell_length());
  detail::FftWorkspace ws(n, basis_size);
  auto buf = ws.data();
  for (Index c = 0; c < basis_size; ++c) buf.col(c) = q.col(order[static_cast<std::size_t>(c)]);
  ws.backward();
  for (Index c = 0; c < basis_size; ++c) {
    const Index i = order[static_cast<std::size_t>(c)];
    FloquetMode mode;
    mode.kappa = monodromy.kappa;
    mode.label = c;
    mode.quasienergy = energy[i];
    mode.eigenphase = t(i, i);
    mode.mean_kinetic = kinetic[i];
    mode.samples.spacing = dx;
    mode.samples.amplitudes.resize(n);
    for (Index j = 0; j < n; ++j) {
      mode.samples.amplitudes[j] = buf(j, c) * scale * std::polar(1.0, monodromy.kappa * dx * j);
    }
    Index peak = 0;
    mode.samples.amplitudes.cwiseAbs2().maxCoeff(&peak);
    const Complex gauge = std::conj(mode.samples.amplitudes[peak]) /
                          std::abs(mode.samples.amplitudes[peak]);
    mode.samples.amplitudes *= gauge;
    mode.coefficients = q.col(i) * gauge;
    out.modes.push_back(std::move(mode));
  }

  for (Index a = 0; a < basis_size; ++a) {
    for (Index b = a + 1; b < basis_size; ++b) {
      if (quasienergy_distance(out.modes[a].quasienergy, out.modes[b].quasienergy, hw) <
          1e-10 * hw) {
        out.near_degenerate.emplace_back(a, b);
      }
    }
  }
  return out;
}

FloquetSpectrum solve_floquet(const LatticeSpec& spec, Index points, double kappa,
                              const PropagationParams& params, Index basis_size) {
  return diagonalize(build_monodromy(spec, points, kappa, params), basis_size);
}

std::vector<double> overlap_weights(const FloquetSpectrum& spectrum,
                                    const ComplexState& reference) {
  std::vector<double> out;
  out.reserve(spectrum.modes.size());
  for (const auto& mode : spectrum.modes) out.push_back(std::norm(inner(mode.samples, reference)));
  return out;
}

FloquetSpectrum label_by_overlap(FloquetSpectrum spectrum, const ComplexState& reference) {
  const std::vector<double> w = overlap_weights(spectrum, reference);
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& modes = spectrum.modes;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(w[a] - w[b]) > 1e-12) return w[a] > w[b];
    if (modes[a].quasienergy != modes[b].quasienergy) {
      return modes[a].quasienergy < modes[b].quasienergy;
    }
    return modes[a].mean_kinetic < modes[b].mean_kinetic;
  });
  std::vector<Index> position(w.size());
  std::vector<FloquetMode> sorted;
  sorted.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    position[order[i]] = static_cast<Index>(i);
    sorted.push_back(std::move(spectrum.modes[order[i]]));
    sorted.back().label = static_cast<Index>(i);
  }
  spectrum.modes = std::move(sorted);
  for (auto& [a, b] : spectrum.near_degenerate) {
    a = position[static_cast<std::size_t>(a)];
    b = position[static_cast<std::size_t>(b)];
    if (a > b) std::swap(a, b);
  }
  return spectrum;
}

ComplexState uniform_reference(const LatticeSpec& spec, Index points, double kappa) {
  const SupercellGrid grid(spec, points);
  ComplexState out{CVector(points), grid.spacing()};
  const double amp = 1.0 / std::sqrt(spec.cell_length());
  for (Index j = 0; j < points; ++j) out.amplitudes[j] = std::polar(amp, kappa * grid.position(j));
  return out;
}

RVector mode_site_weights(const FloquetMode& mode, const LatticeSpec& spec) {
  return site_probabilities(mode.samples, spec);
}

Index FloquetSolveOptions::resolved_points(const LatticeSpec& spec) const {
  return points > 0 ? points : default_points_per_cell(spec);
}

PropagationParams FloquetSolveOptions::params_for(double omega) const {
  PropagationParams p = PropagationParams::for_frequency(omega, start_time);
  if (substeps_per_period > 0) p.substeps_per_period = substeps_per_period;
  return p;
}

std::vector<double> fgs_uniform_overlap(const LatticeSpec& spec, const std::vector<double>& omegas,
                                        const FloquetSolveOptions& options) {
  return parallel_map(omegas.size(), options.workers, [&](std::size_t i) {
    return band_point(spec, omegas[i], 0.0, options).fgs_overlap;
  });
}

double resonance_frequency(const LatticeSpec& spec, int alpha, int folds) {
  if (folds < 1) throw ConfigError("fold count must be >= 1");
  const double l = spec.cell_length();
  return 2.0 * kPi * kPi * spec.hbar * alpha * alpha / (spec.mass * l * l * folds);
}

std::vector<ResonancePrediction> predict_resonances(const LatticeSpec& spec, int alpha_max,
                                                    int folds_max) {
  if (alpha_max < 1 || folds_max < 1) throw ConfigError("alpha_max and folds_max must be >= 1");
  std::vector<ResonancePrediction> out;
  for (int a = 1; a <= alpha_max; ++a) {
    for (int n = 1; n <= folds_max; ++n) out.push_back({a, n, resonance_frequency(spec, a, n)});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.omega != y.omega) return x.omega < y.omega;
    return x.alpha < y.alpha;
  });
  return out;
}

BandPoint band_point(const LatticeSpec& spec, double omega, double kappa,
                     const FloquetSolveOptions& options) {
  const LatticeSpec s = spec.with_frequency(omega);
  const Index points = options.resolved_points(s);
  BandPoint out;
  out.omega = omega;
  const ComplexState reference = uniform_reference(s, points, kappa);
  out.spectrum = label_by_overlap(
      solve_floquet(s, points, kappa, options.params_for(omega), options.basis_size), reference);
  const auto& modes = out.spectrum.modes;
  const std::vector<double> w = overlap_weights(out.spectrum, reference);
  out.fgs_overlap = w.front();
  out.fgs_quasienergy = modes.front().quasienergy;
  out.ambiguous = w.size() > 1 && w[0] - w[1] < 1e-3;
  out.gap = s.hbar * omega;
  for (std::size_t b = 1; b < modes.size(); ++b) {
    const double d =
        quasienergy_distance(modes[b].quasienergy, modes.front().quasienergy, s.hbar * omega);
    if (d < out.gap) {
      out.gap = d;
      out.nearest = static_cast<Index>(b);
    }
  }
  return out;
}

std::vector<CrossingCandidate> local_minima(const std::vector<double>& x,
                                            const std::vector<double>& values) {
  std::vector<CrossingCandidate> out;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    const double y0 = values[i - 1], y1 = values[i], y2 = values[i + 1];
    if (!(y1 <= y0 && y1 <= y2) || (y1 == y0 && y1 == y2)) continue;
    // A plateau minimum is reported once, at its left edge.
    if (y1 == y0 && !out.empty() && out.back().grid_index + 1 == static_cast<Index>(i)) continue;
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    const double c = (x1 * x2 * (x1 - x2) * y0 + x2 * x0 * (x2 - x0) * y1 +
                      x0 * x1 * (x0 - x1) * y2) / denom;
    CrossingCandidate cand{x1, y1, static_cast<Index>(i)};
    if (a > 0.0) {
      const double xv = -b / (2.0 * a);
      if (xv >= x0 && xv <= x2) {
        cand.omega = xv;
        cand.gap = std::max(0.0, c - b * b / (4.0 * a));
      }
    }
    out.push_back(cand);
  }
  return out;
}

BandContinuation band_continuation(const LatticeSpec& spec, const std::vector<double>& omegas,
                                   double kappa, const FloquetSolveOptions& options) {
  for (std::size_t i = 1; i < omegas.size(); ++i) {
    if (!(omegas[i] > omegas[i - 1])) throw ConfigError("omega grid must be strictly increasing");
  }
  BandContinuation out;
  out.points = parallel_map(omegas.size(), options.workers, [&](std::size_t i) {
    try {
      return band_point(spec, omegas[i], kappa, options);
    } catch (const NumericalError& e) {
      BandPoint failed;
      failed.omega = omegas[i];
      failed.error = e.what();
      return failed;
    }
  });
  // Minima are searched within runs of successful points.
  std::vector<double> x, g;
  std::vector<Index> index;
  auto flush = [&] {
    for (auto cand : local_minima(x, g)) {
      cand.grid_index = index[static_cast<std::size_t>(cand.grid_index)];
      out.candidates.push_back(cand);
    }
    x.clear();
    g.clear();
    index.clear();
  };
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (out.points[i].error) {
      flush();
      continue;
    }
    x.push_back(out.points[i].omega);
    g.push_back(out.points[i].gap);
    index.push_back(static_cast<Index>(i));
  }
  flush();
  return out;
}

CrossingCandidate refine_gap_minimum(const LatticeSpec& spec, double kappa, double lo, double hi,
                                     double tolerance, const FloquetSolveOptions& options) {
  if (!(hi > lo) || !(tolerance > 0.0)) throw ConfigError("invalid refinement bracket");
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  auto gap = [&](double w) { return band_point(spec, w, kappa, options).gap; };
  double a = lo, b = hi;
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double gc = gap(c), gd = gap(d);
  while (b - a > tolerance) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - ratio * (b - a);
      gc = gap(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + ratio * (b - a);
      gd = gap(d);
    }
  }
  return gc < gd ? CrossingCandidate{c, gc, 0} : CrossingCandidate{d, gd, 0};
}

}  // namespace floq
