#pragma once

#include "floq/lattice.hpp"

#include <memory>

namespace floq {

struct PropagationParams {
  long substeps_per_period = 2048;
  double start_time = 0.0;

  /// max(2048, ceil(2048 * omega)) substeps, so the driving phase advances
  /// by less than 2 pi / 2048 per substep.
  static PropagationParams for_frequency(double omega, double start_time = 0.0);

  void validate() const;
};

/// Symmetric split-step spectral propagator (half kinetic, potential at the
/// substep midpoint time, half kinetic) on `supercells` copies of an
/// `points_per_cell` supercell grid, with Bloch twist `kappa`.
///
/// Internally states are periodic parts u(x) = exp(-i kappa x) Phi(x); the
/// kinetic phase uses the shifted momentum ladder k_q + kappa.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const LatticeSpec& spec, Index points_per_cell, Index supercells,
                      double kappa, const PropagationParams& params);
  ~SplitStepPropagator();
  SplitStepPropagator(SplitStepPropagator&&) noexcept;
  SplitStepPropagator& operator=(SplitStepPropagator&&) noexcept;

  Index size() const;
  double kappa() const;
  double substep() const;
  /// k_q + kappa in FFT ordering (q = 0..n/2-1, then -n/2..-1).
  const RVector& momenta() const;

  /// Advances columns of DFT coefficients of the periodic part from
  /// `start_time` by `duration` (> 0). With `backward`, applies the exact
  /// inverse: the columns are taken at start_time + duration and returned at
  /// start_time. Non-multiples of the substep use a uniformly shrunk substep.
  void advance_momentum(CMatrix& columns, double start_time, double duration,
                        bool backward = false) const;

  /// Same contract on real-space Bloch samples Phi(x_j) = exp(i kappa x_j) u(x_j).
  ComplexState advance(const ComplexState& state, double start_time, double duration,
                       bool backward = false) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Evolves a supercell state with quasimomentum twist kappa, |kappa| <= pi/(n_p L),
/// from params.start_time over `duration` > 0.
ComplexState evolve_twisted(const ComplexState& state, double kappa, const LatticeSpec& spec,
                            const PropagationParams& params, double duration);

/// Exact inverse of evolve_twisted: takes the state at start_time + duration back to start_time.
ComplexState evolve_twisted_backward(const ComplexState& state, double kappa,
                                     const LatticeSpec& spec, const PropagationParams& params,
                                     double duration);

/// Direct split-step evolution on the full ring (periodic, no twist). The
/// supercell count is inferred from the state length and spacing.
ComplexState evolve_ring(const ComplexState& state, const LatticeSpec& spec,
                         const PropagationParams& params, double duration);

ComplexState evolve_ring_backward(const ComplexState& state, const LatticeSpec& spec,
                                  const PropagationParams& params, double duration);

/// <H(t)> for a Bloch state with twist kappa on a supercell or ring.
double energy_expectation(const ComplexState& state, double kappa, const LatticeSpec& spec,
                          double t);

/// Number of grid points per supercell implied by a state's spacing.
Index points_per_cell_of(const ComplexState& state, const LatticeSpec& spec);

}  // namespace floq
