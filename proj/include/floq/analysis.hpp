#pragma once

#include "floq/config.hpp"
#include "floq/dynamics.hpp"
#include "floq/floquet.hpp"

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace floq {

/// One frequency of a kappa = 0 supercell sweep with a uniform initial state.
struct SweepRecord {
  double omega = 0.0;
  double n_max = 0.0;          // max over sites and m in [0, horizon] of n_s(mT)
  Index argmax_site = 0;
  long argmax_period = 0;
  double overlap = 0.0;        // |<Phi_0 | Phi_u>|^2
  double eps_fgs = 0.0;
  double gap = 0.0;            // FGS distance to the nearest converged band
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

struct SweepResult {
  std::vector<SweepRecord> records;   // one per omega-grid point, ascending
  std::vector<SweepRecord> refined;   // extra points added around n_max peaks
  std::size_t failures() const;
};

/// Evaluates one sweep frequency. The monodromy is diagonalized in the full
/// grid basis (so the uniform state decomposes exactly); the gap is taken over
/// the `basis` lowest-kinetic modes. Numerical failures are returned in `error`.
SweepRecord sweep_point(const ExperimentConfig& config, double omega);

struct SweepOptions {
  bool refine_peaks = false;
  double refine_threshold = 0.45;   // only peaks with n_max above this are refined
  double refine_step = 1e-3;
};

/// n_max(omega) together with the overlap and gap columns.
SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& options = {});

/// run_sweep with bisection refinement around n_max peaks.
SweepResult run_nmax_sweep(const ExperimentConfig& config);

/// run_sweep without refinement; the overlap column is the quantity of interest.
SweepResult run_overlap_sweep(const ExperimentConfig& config);

/// Local minima of the overlap column whose prominence (depth below the lower
/// of the two flanking maxima) is at least `min_prominence`.
std::vector<CrossingCandidate> overlap_dips(const SweepResult& sweep, double min_prominence);

/// Local maxima of n_max with value at least `min_value`.
std::vector<CrossingCandidate> nmax_peaks(const SweepResult& sweep, double min_value);

enum class EvolutionMethod { floquet, direct };

struct EvolutionOptions {
  EvolutionMethod method = EvolutionMethod::floquet;
  Index keep_modes = 0;        // > 0: few-mode truncation
  Index excited_band = 0;      // > 0: two-band reconstruction with this band
  std::vector<long> snapshots; // periods at which the full state is kept
  double boundary_tolerance = kGaussianBoundaryTolerance;
};

struct EvolutionResult {
  PopulationTrace trace;
  std::vector<std::pair<long, ComplexState>> snapshots;
  double residual = 0.0;
  bool ambiguous_bands = false;
};

/// Site populations n_s(mT), m = 0..horizon, on the configured domain.
EvolutionResult run_evolution(const ExperimentConfig& config, const EvolutionOptions& options = {});

struct ResonanceRow {
  int alpha = 0;
  int folds = 0;
  double omega_res = 0.0;
  std::optional<double> nearest_dip;
  std::optional<double> residual;   // nearest_dip - omega_res
};

/// Pairs each prediction with the nearest detected overlap dip.
/// Throws ConfigError when the sweep holds no successful records.
std::vector<ResonanceRow> report_resonances(const LatticeSpec& spec, const SweepResult& sweep,
                                            int alpha_max = 20, int folds_max = 2,
                                            double min_prominence = 0.0);

// CSV output: '#' metadata lines (version, config hash, resolved config), a
// header row, then one record per line with 17 significant digits.
void write_metadata(std::ostream& out, const ExperimentConfig& config);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep, bool refined = false);
void write_evolution_csv(std::ostream& out, const PopulationTrace& trace, const LatticeSpec& spec);
void write_modes_csv(std::ostream& out, const std::vector<FloquetSpectrum>& spectra);
void write_resonances_csv(std::ostream& out, const std::vector<ResonanceRow>& rows);
void write_spectrum_csv(std::ostream& out, const BandContinuation& bands);
void write_crossings_csv(std::ostream& out, const BandContinuation& bands);

/// Reads a sweep CSV written by write_sweep_csv ('#' lines are skipped).
SweepResult read_sweep_csv(std::istream& in);

std::string format_real(double v);

}  // namespace floq
