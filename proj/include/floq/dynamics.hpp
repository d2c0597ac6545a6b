#pragma once

#include "floq/floquet.hpp"
#include "floq/lattice.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace floq {

/// Floquet-Bloch spectra on the quasimomentum grid of a ring, band-labeled so
/// that mode index alpha at every kappa continues the kappa = 0 mode alpha
/// (itself labeled by overlap with the uniform state).
struct RingSpectra {
  LatticeSpec spec;
  Index supercells = 1;
  Index cell_points = 0;
  std::vector<double> kappas;               // ring order j = 0..M-1
  std::vector<FloquetSpectrum> spectra;     // one per kappa
  // (kappa index, band) pairs whose matching to kappa = 0 was ambiguous.
  std::vector<std::pair<Index, Index>> ambiguous;
};

/// Reorders `spectrum` so mode alpha has maximal periodic-part overlap with
/// `reference` mode alpha (greedy in reference order). Bands whose best and
/// second-best candidates differ by less than 1e-3 in squared overlap are
/// returned in the second member.
std::pair<FloquetSpectrum, std::vector<Index>> match_bands(const FloquetSpectrum& reference,
                                                           FloquetSpectrum spectrum);

/// Solves the monodromy at every kappa_j of the ring and labels the bands.
RingSpectra solve_ring_spectra(const LatticeSpec& spec, const RingDomain& ring,
                               const FloquetSolveOptions& options = {});

/// Largest tolerated completeness residual for a decomposition.
inline constexpr double kMaxDecompositionResidual = 1e-4;

/// Coefficients C_{alpha, kappa_j} of a ring state over the Floquet-Bloch modes.
/// Modes are extended to the ring as Phi(x + c n_p L) = exp(i 2 pi j c / M) Phi(x)
/// and normalized by 1/sqrt(M).
struct SpectralDecomposition {
  std::shared_ptr<const RingSpectra> spectra;
  CMatrix coefficients;   // (mode, kappa index)
  double input_norm_squared = 1.0;
  double residual = 0.0;  // 1 - sum |C|^2 / <psi|psi>

  Index supercells() const { return spectra->supercells; }
  Index modes() const { return coefficients.rows(); }
  double captured_weight() const { return coefficients.squaredNorm(); }
};

/// C = <Phi_ring | psi>. Throws NumericalError when the completeness residual
/// exceeds `max_residual` (basis too small).
SpectralDecomposition decompose(const ComplexState& initial,
                                std::shared_ptr<const RingSpectra> spectra,
                                double max_residual = kMaxDecompositionResidual);

/// Psi(x, t0 + m T) = sum_{alpha, j} C exp(-i eps m T / hbar) Phi_ring.
ComplexState stroboscopic_evolve(const SpectralDecomposition& dec, long periods);

/// Zeroes every band with label >= keep, at all kappa. No renormalization.
SpectralDecomposition truncate_modes(SpectralDecomposition dec, Index keep);

/// Keeps only the listed bands, at all kappa.
SpectralDecomposition keep_bands(SpectralDecomposition dec, const std::vector<Index>& bands);

/// Reconstruction restricted to the FGS band 0 and one excited band.
ComplexState two_band_reconstruct(const SpectralDecomposition& dec, Index excited, long periods);

/// True when any of `bands` was ambiguously matched at some kappa.
bool bands_ambiguous(const RingSpectra& spectra, const std::vector<Index>& bands);

/// n_s = integral of |psi|^2 over [(s-1)L, sL) for every site of the domain.
RVector site_populations(const ComplexState& state, const LatticeSpec& spec,
                         bool require_aligned = false);

/// n_s(mT) for m = 0..horizon; rows are periods, columns sites.
struct PopulationTrace {
  std::vector<long> periods;
  RMatrix populations;

  Index sites() const { return populations.cols(); }
};

PopulationTrace population_trace(const SpectralDecomposition& dec, long horizon);

/// Same trace from direct split-step integration on the ring.
PopulationTrace direct_population_trace(const ComplexState& initial, const LatticeSpec& spec,
                                        const PropagationParams& params, long horizon);

/// hbar omega / |eps_b - eps_a| with the circle distance on the zone.
/// Throws DegeneratePairError for coinciding quasienergies.
double interference_period(double eps_a, double eps_b, double omega, double hbar = 1.0);

/// max - min of column `site` over rows with first <= period <= last.
double peak_to_peak(const PopulationTrace& trace, Index site, long first, long last);

/// Period (in driving periods) of the strongest oscillation of a
/// stroboscopic series, from the peak of its Hann-windowed periodogram.
double dominant_period(const RVector& series);

/// The n_p sites of the supercell nearest to `center`, in site order.
std::vector<Index> central_sites(const LatticeSpec& spec, Index supercells, double center);

}  // namespace floq
