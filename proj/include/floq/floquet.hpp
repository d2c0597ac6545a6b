#pragma once

#include "floq/lattice.hpp"
#include "floq/propagator.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace floq {

/// Modes reported per quasimomentum: plane waves up to |alpha| = 20.
inline constexpr Index kDefaultBasisSize = 41;
/// Pass as basis size to keep every eigenmode of the monodromy.
inline constexpr Index kAllModes = -1;

/// One-period time-evolution operator at fixed quasimomentum, in the plane-wave
/// basis exp(i (k_a + kappa) x) / sqrt(n_p L) of the supercell grid (FFT order):
/// matrix(b, a) = <b| U(T + t0, t0) |a>.
struct Monodromy {
  CMatrix matrix;
  RVector momenta;
  LatticeSpec spec;
  double kappa = 0.0;
  double start_time = 0.0;

  Index dimension() const { return matrix.rows(); }
};

/// Max-norm defect ||U^dagger U - I||_max.
double unitarity_defect(const CMatrix& u);

inline constexpr double kUnitarityTolerance = 1e-8;

/// Propagates every grid plane wave over one period with the twisted
/// split-step propagator. Throws NumericalError if the result is not unitary
/// within kUnitarityTolerance.
Monodromy build_monodromy(const LatticeSpec& spec, Index points, double kappa,
                          const PropagationParams& params);

/// Wraps an externally supplied matrix, e.g. for testing the diagonalizer.
Monodromy monodromy_from_matrix(CMatrix matrix, const LatticeSpec& spec, double kappa,
                                double start_time = 0.0);

struct FloquetMode {
  double kappa = 0.0;
  Index label = 0;
  double quasienergy = 0.0;
  Complex eigenphase{1.0, 0.0};
  double mean_kinetic = 0.0;
  ComplexState samples;   // Phi(x, t0) on the supercell, normalized
  CVector coefficients;   // plane-wave coefficients, unit norm, FFT order
};

struct FloquetSpectrum {
  LatticeSpec spec;
  double kappa = 0.0;
  double start_time = 0.0;
  std::vector<FloquetMode> modes;
  Index basis_size = 0;
  // Index pairs (into modes) whose quasienergies lie within 1e-10 hbar omega.
  std::vector<std::pair<Index, Index>> near_degenerate;

  double zone_width() const { return spec.hbar * spec.frequency; }
};

/// Folds a quasienergy into [-hbar omega / 2, hbar omega / 2].
double fold_quasienergy(double energy, double hbar_omega);

/// Distance on the quasienergy circle: min(|d|, hbar omega - |d|).
double quasienergy_distance(double a, double b, double hbar_omega);

/// Schur-diagonalizes the monodromy. Eigenvectors are the (orthonormal) Schur
/// vectors. Keeps the `basis_size` modes of lowest mean kinetic energy (the
/// best converged ones), ordered by ascending kinetic energy; kAllModes keeps
/// everything. Each mode is gauge-fixed so its largest sample is real positive.
FloquetSpectrum diagonalize(const Monodromy& monodromy, Index basis_size = kDefaultBasisSize);

/// build_monodromy followed by diagonalize.
FloquetSpectrum solve_floquet(const LatticeSpec& spec, Index points, double kappa,
                              const PropagationParams& params,
                              Index basis_size = kDefaultBasisSize);

/// |<Phi_alpha | reference>|^2 for every mode, in spectrum order.
std::vector<double> overlap_weights(const FloquetSpectrum& spectrum, const ComplexState& reference);

/// Reorders modes by descending overlap with `reference` and relabels them;
/// mode 0 is the Floquet ground state. Overlaps equal within 1e-12 are ordered
/// by ascending quasienergy, then by ascending mean kinetic energy.
FloquetSpectrum label_by_overlap(FloquetSpectrum spectrum, const ComplexState& reference);

/// exp(i kappa x) / sqrt(n_p L) sampled on a supercell grid.
ComplexState uniform_reference(const LatticeSpec& spec, Index points, double kappa = 0.0);

/// Fraction of a supercell mode's weight on each of the n_p sites.
RVector mode_site_weights(const FloquetMode& mode, const LatticeSpec& spec);

struct FloquetSolveOptions {
  Index points = 0;                 // 0: default_points_per_cell
  Index basis_size = kDefaultBasisSize;
  long substeps_per_period = 0;     // 0: PropagationParams::for_frequency
  double start_time = 0.0;
  unsigned workers = 1;

  Index resolved_points(const LatticeSpec& spec) const;
  PropagationParams params_for(double omega) const;
};

/// |<Phi_0 | Phi_u>|^2 at kappa = 0 for every frequency in `omegas`.
std::vector<double> fgs_uniform_overlap(const LatticeSpec& spec, const std::vector<double>& omegas,
                                        const FloquetSolveOptions& options = {});

struct ResonancePrediction {
  int alpha = 0;
  int folds = 0;
  double omega = 0.0;
};

/// 2 pi^2 hbar alpha^2 / (m (n_p L)^2 n).
double resonance_frequency(const LatticeSpec& spec, int alpha, int folds);

/// All predictions for 1 <= alpha <= alpha_max, 1 <= n <= folds_max, ascending in omega.
std::vector<ResonancePrediction> predict_resonances(const LatticeSpec& spec, int alpha_max,
                                                    int folds_max);

struct BandPoint {
  double omega = 0.0;
  FloquetSpectrum spectrum;    // labeled: modes[0] is the FGS
  double fgs_overlap = 0.0;
  double fgs_quasienergy = 0.0;
  double gap = 0.0;            // circle distance from the FGS to the nearest other mode
  Index nearest = 0;           // index of that mode
  bool ambiguous = false;      // top two overlaps within 1e-3
  std::optional<std::string> error;
};

struct CrossingCandidate {
  double omega = 0.0;
  double gap = 0.0;
  Index grid_index = 0;
};

struct BandContinuation {
  std::vector<BandPoint> points;
  std::vector<CrossingCandidate> candidates;
};

/// FGS gap of one frequency; the spectrum is labeled against the kappa-twisted uniform state.
BandPoint band_point(const LatticeSpec& spec, double omega, double kappa,
                     const FloquetSolveOptions& options);

/// Three-point local minima of `values`, refined by the vertex of the
/// parabola through the three samples.
std::vector<CrossingCandidate> local_minima(const std::vector<double>& x,
                                            const std::vector<double>& values);

/// Tracks the FGS over an omega grid and reports avoided-crossing candidates
/// as local minima of its gap to the nearest band.
BandContinuation band_continuation(const LatticeSpec& spec, const std::vector<double>& omegas,
                                   double kappa, const FloquetSolveOptions& options = {});

/// Golden-section search for the FGS gap minimum in [lo, hi].
CrossingCandidate refine_gap_minimum(const LatticeSpec& spec, double kappa, double lo, double hi,
                                     double tolerance, const FloquetSolveOptions& options = {});

}  // namespace floq
