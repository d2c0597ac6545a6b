#include "floq/lattice.hpp"

#include "floq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace floq {

namespace {

long floor_mod(long a, long n) {
  const long r = a % n;
  return r < 0 ? r + n : r;
}

bool is_seven_smooth(Index n) {
  for (Index p : {2, 3, 5, 7}) {
    while (n % p == 0) n /= p;
  }
  return n == 1;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

double LatticeSpec::phase_of(long site) const {
  return phases[static_cast<std::size_t>(floor_mod(site, sites_per_cell))];
}

double LatticeSpec::displacement(long site, double t) const {
  return amplitude * std::cos(frequency * t + phase_of(site));
}

LatticeSpec LatticeSpec::with_frequency(double omega) const {
  LatticeSpec out = *this;
  out.frequency = omega;
  return out;
}

void LatticeSpec::validate() const {
  require(sites_per_cell >= 1, "sites per cell must be >= 1");
  require(mass > 0.0 && std::isfinite(mass), "mass must be positive");
  require(hbar > 0.0 && std::isfinite(hbar), "hbar must be positive");
  // V0 = 0 (free particle) is allowed as a reference case.
  require(barrier_height >= 0.0 && std::isfinite(barrier_height),
          "barrier height must be >= 0");
  require(barrier_width > 0.0 && std::isfinite(barrier_width), "barrier width must be positive");
  require(spacing > 0.0 && std::isfinite(spacing), "lattice spacing must be positive");
  require(frequency > 0.0 && std::isfinite(frequency), "driving frequency must be positive");
  require(amplitude >= 0.0 && std::isfinite(amplitude), "driving amplitude must be >= 0");
  require(phases.size() == static_cast<std::size_t>(sites_per_cell),
          "phase list length must equal sites per cell (" + std::to_string(phases.size()) +
              " != " + std::to_string(sites_per_cell) + ")");
  for (double p : phases) require(std::isfinite(p), "phases must be finite");
}

double potential(double x, double t, const LatticeSpec& spec) {
  const double reach = spec.amplitude + 8.0 * spec.barrier_width;
  const long first = static_cast<long>(std::floor((x - reach) / spec.spacing));
  const long last = static_cast<long>(std::ceil((x + reach) / spec.spacing));
  double v = 0.0;
  for (long s = first; s <= last; ++s) {
    const double u = (x - static_cast<double>(s) * spec.spacing - spec.displacement(s, t)) /
                     spec.barrier_width;
    v += std::exp(-u * u);
  }
  return spec.barrier_height * v;
}

void sample_potential(const RVector& positions, double t, const LatticeSpec& spec,
                      Eigen::Ref<RVector> out) {
  for (Index j = 0; j < positions.size(); ++j) out[j] = potential(positions[j], t, spec);
}

SupercellGrid::SupercellGrid(const LatticeSpec& spec, Index points)
    : points_(points), length_(spec.cell_length()) {
  if (points < 2) throw ConfigError("supercell grid needs at least 2 points");
  if (spacing() > spec.barrier_width / 4.0 * (1.0 + 1e-12)) {
    throw ConfigError("grid spacing " + std::to_string(spacing()) +
                      " does not resolve barrier width (need dx <= width/4)");
  }
}

RVector SupercellGrid::positions() const {
  RVector x(points_);
  for (Index j = 0; j < points_; ++j) x[j] = position(j);
  return x;
}

Index default_points_per_cell(const LatticeSpec& spec) {
  const Index np = spec.sites_per_cell;
  const double cutoff = 5.0 * std::max(spec.barrier_height, spec.hbar * spec.frequency);
  auto resolves = [&](Index n) {
    const double dx = spec.cell_length() / static_cast<double>(n);
    const double k_max = kPi / dx;
    return dx <= spec.barrier_width / 4.0 * (1.0 + 1e-12) &&
           spec.hbar * spec.hbar * k_max * k_max / (2.0 * spec.mass) >= cutoff;
  };
  Index n = np;
  while (!resolves(n) || (np <= 7 && !is_seven_smooth(n))) n += np;
  return n;
}

RingDomain::RingDomain(const SupercellGrid& cell, Index supercells)
    : cell_(cell), cells_(supercells) {
  if (supercells < 1) throw ConfigError("ring needs at least one supercell");
}

RVector RingDomain::positions() const {
  RVector x(size());
  for (Index j = 0; j < size(); ++j) x[j] = position(j);
  return x;
}

double RingDomain::kappa(Index j) const {
  // j in [0, M); fold j > M/2 to negative quasimomenta.
  const Index folded = j > cells_ / 2 ? j - cells_ : j;
  return 2.0 * kPi * static_cast<double>(folded) / length();
}

std::vector<double> RingDomain::kappas() const {
  std::vector<double> out(static_cast<std::size_t>(cells_));
  for (Index j = 0; j < cells_; ++j) out[static_cast<std::size_t>(j)] = kappa(j);
  return out;
}

double ComplexState::norm() const { return std::sqrt(norm_squared()); }

namespace {

ComplexState sample_initial(const InitialStateSpec& init, Index points, double dx,
                            double boundary_tolerance) {
  const double length = static_cast<double>(points) * dx;
  ComplexState state{CVector(points), dx};
  if (init.kind == InitialStateSpec::Kind::uniform) {
    state.amplitudes.setConstant(Complex(1.0 / std::sqrt(length), 0.0));
    return state;
  }
  const double sigma = init.width;
  if (!(sigma > 0.0)) throw ConfigError("gaussian width must be positive");
  const double half = 0.5 * length;
  const double boundary = std::exp(-half * half / (2.0 * sigma * sigma));
  if (boundary > boundary_tolerance) {
    throw ConfigError("gaussian of width " + std::to_string(sigma) +
                      " is too wide for a periodic domain of length " + std::to_string(length) +
                      " (boundary amplitude " + std::to_string(boundary) + " of peak)");
  }
  const double prefactor = std::pow(kPi * sigma * sigma, -0.25);
  for (Index j = 0; j < points; ++j) {
    double d = std::remainder(static_cast<double>(j) * dx - init.center, length);
    state.amplitudes[j] = prefactor * std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return normalized(std::move(state));
}

}  // namespace

ComplexState make_initial_state(const InitialStateSpec& init, const SupercellGrid& grid,
                                double boundary_tolerance) {
  return sample_initial(init, grid.size(), grid.spacing(), boundary_tolerance);
}

ComplexState make_initial_state(const InitialStateSpec& init, const RingDomain& ring,
                                double boundary_tolerance) {
  return sample_initial(init, ring.size(), ring.spacing(), boundary_tolerance);
}

Complex inner(const ComplexState& a, const ComplexState& b) {
  if (a.size() != b.size() || std::abs(a.spacing - b.spacing) > 1e-12 * a.spacing) {
    throw ConfigError("inner product of states on different grids");
  }
  return a.amplitudes.dot(b.amplitudes) * a.spacing;
}

ComplexState normalized(ComplexState state) {
  const double n = state.norm();
  if (!(n > 0.0)) throw ConfigError("cannot normalize a zero state");
  state.amplitudes /= n;
  return state;
}

RVector site_probabilities(const ComplexState& state, const LatticeSpec& spec,
                           bool require_aligned) {
  const double dx = state.spacing;
  const Index n = state.size();
  const double total = dx * static_cast<double>(n);
  const double ratio = total / spec.spacing;
  const Index sites = static_cast<Index>(std::llround(ratio));
  if (sites < 1 || std::abs(ratio - static_cast<double>(sites)) > 1e-8 * ratio) {
    throw ConfigError("domain is not a whole number of lattice sites");
  }
  RVector cumulative(n + 1);
  cumulative[0] = 0.0;
  for (Index j = 0; j < n; ++j) cumulative[j + 1] = cumulative[j] + std::norm(state.amplitudes[j]) * dx;

  // Sample j owns the centered cell [x_j - dx/2, x_j + dx/2). In the shifted
  // coordinate y = x + dx/2 cell j is [j dx, (j + 1) dx); F is the integral
  // of the piecewise-constant density over [0, y], y in [0, total].
  auto integral_to = [&](double y) {
    const double r = y / dx;
    const Index whole = static_cast<Index>(std::llround(r));
    if (std::abs(r - static_cast<double>(whole)) < 1e-9 * std::max(1.0, r)) {
      return cumulative[std::clamp<Index>(whole, 0, n)];
    }
    const Index j = std::clamp<Index>(static_cast<Index>(std::floor(r)), 0, n - 1);
    return cumulative[j] + (y - static_cast<double>(j) * dx) * std::norm(state.amplitudes[j]);
  };
  auto integral = [&](double a, double b) {
    if (b <= total) return integral_to(b) - integral_to(a);
    return (cumulative[n] - integral_to(a)) + integral_to(b - total);
  };

  RVector out(sites);
  for (Index s = 0; s < sites; ++s) {
    const Index first_site = s == 0 ? sites - 1 : s - 1;
    const double a = static_cast<double>(first_site) * spec.spacing;
    if (require_aligned) {
      const double r = a / dx;
      if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r)) {
        throw ConfigError("site boundary does not fall on a grid point");
      }
    }
    out[s] = integral(a + 0.5 * dx, a + spec.spacing + 0.5 * dx);
  }
  return out;
}

}  // namespace floq
