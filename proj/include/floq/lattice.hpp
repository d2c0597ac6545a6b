#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <vector>

namespace floq {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;

/// Physical parameters of the site-dependently driven barrier lattice.
///
/// Barrier s sits at s*spacing + amplitude*cos(frequency*t + phases[s mod n_p]).
/// Defaults are the dimensionless reference set (m = hbar = 1, V0 = 1,
/// width 0.5, spacing 10, A = 1, omega = 1, phases (0, pi, 0)).
struct LatticeSpec {
  double mass = 1.0;
  double hbar = 1.0;
  double barrier_height = 1.0;
  double barrier_width = 0.5;
  double spacing = 10.0;
  double amplitude = 1.0;
  double frequency = 1.0;
  std::vector<double> phases{0.0, kPi, 0.0};
  int sites_per_cell = 3;

  double period() const { return 2.0 * kPi / frequency; }
  double cell_length() const { return sites_per_cell * spacing; }
  double phase_of(long site) const;
  // d_s(t)
  double displacement(long site, double t) const;
  // Edge of the first spatial Brillouin zone, pi / (n_p L).
  double zone_edge() const { return kPi / cell_length(); }

  LatticeSpec with_frequency(double omega) const;

  // Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Driven potential V(x, t). Image barriers farther than 8 widths (plus the
/// driving amplitude) from x are dropped.
double potential(double x, double t, const LatticeSpec& spec);

/// Samples the potential at `positions` into `out`.
void sample_potential(const RVector& positions, double t, const LatticeSpec& spec,
                      Eigen::Ref<RVector> out);

/// Uniform sampling of one supercell [0, n_p L).
class SupercellGrid {
 public:
  SupercellGrid(const LatticeSpec& spec, Index points);

  Index size() const { return points_; }
  double length() const { return length_; }
  double spacing() const { return length_ / static_cast<double>(points_); }
  double position(Index j) const { return static_cast<double>(j) * spacing(); }
  RVector positions() const;

 private:
  Index points_;
  double length_;
};

/// Smallest 7-smooth multiple of n_p with dx <= width/4 and a kinetic cutoff
/// hbar^2 (pi/dx)^2 / 2m of at least 5 max(V0, hbar omega). Every site then
/// holds a whole number of points (240 for the reference lattice).
Index default_points_per_cell(const LatticeSpec& spec);

/// Ring of M supercells with periodic boundary; induces the quasimomentum grid
/// kappa_j = 2 pi j / (M n_p L), folded into the first Brillouin zone.
class RingDomain {
 public:
  RingDomain(const SupercellGrid& cell, Index supercells);

  const SupercellGrid& cell() const { return cell_; }
  Index supercells() const { return cells_; }
  Index size() const { return cells_ * cell_.size(); }
  double length() const { return static_cast<double>(cells_) * cell_.length(); }
  double spacing() const { return cell_.spacing(); }
  double position(Index j) const { return static_cast<double>(j) * spacing(); }
  RVector positions() const;

  double kappa(Index j) const;
  std::vector<double> kappas() const;

 private:
  SupercellGrid cell_;
  Index cells_;
};

/// Sampled wave function; amplitudes carry dimension 1/sqrt(length).
struct ComplexState {
  CVector amplitudes;
  double spacing = 0.0;

  Index size() const { return amplitudes.size(); }
  double norm_squared() const { return amplitudes.squaredNorm() * spacing; }
  double norm() const;
};

struct InitialStateSpec {
  enum class Kind { gaussian, uniform };

  Kind kind = Kind::uniform;
  double center = 0.0;
  double width = 0.0;

  static InitialStateSpec gaussian(double center, double width) {
    return {Kind::gaussian, center, width};
  }
  static InitialStateSpec uniform() { return {}; }
};

/// Relative boundary amplitude allowed for a Gaussian on a periodic domain.
inline constexpr double kGaussianBoundaryTolerance = 1e-8;

/// Samples and normalizes the initial state. A Gaussian is placed at its
/// minimal-image distance from the center; it is rejected (ConfigError) when
/// its amplitude half a domain away exceeds `boundary_tolerance` of the peak.
ComplexState make_initial_state(const InitialStateSpec& init, const SupercellGrid& grid,
                                double boundary_tolerance = kGaussianBoundaryTolerance);
ComplexState make_initial_state(const InitialStateSpec& init, const RingDomain& ring,
                                double boundary_tolerance = kGaussianBoundaryTolerance);

/// <a|b> = sum conj(a_j) b_j dx. Throws ConfigError when the grids differ.
Complex inner(const ComplexState& a, const ComplexState& b);

ComplexState normalized(ComplexState state);

/// Probability on every lattice site of a supercell or ring state. Site s
/// covers [(s-1)L, sL), so site 0 wraps to the last spacing of the domain.
/// Each sample owns the centered cell [x_j - dx/2, x_j + dx/2); a cell
/// straddling a site boundary is split linearly. With `require_aligned`, boundaries must fall on grid points.
RVector site_probabilities(const ComplexState& state, const LatticeSpec& spec,
                           bool require_aligned = false);

}  // namespace floq
