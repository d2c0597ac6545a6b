#include "floq/propagator.hpp"

#include "fft.hpp"
#include "floq/errors.hpp"

#include <cmath>
#include <string>

namespace floq {

PropagationParams PropagationParams::for_frequency(double omega, double start_time) {
  PropagationParams p;
  p.substeps_per_period =
      std::max<long>(2048, static_cast<long>(std::ceil(2048.0 * omega - 1e-9)));
  p.start_time = start_time;
  return p;
}

void PropagationParams::validate() const {
  if (substeps_per_period < 256) {
    throw ConfigError("substeps per period must be >= 256, got " +
                      std::to_string(substeps_per_period));
  }
  if (!std::isfinite(start_time)) throw ConfigError("start time must be finite");
}

namespace {

// Largest table of cached per-substep potential phases (complex entries).
constexpr Index kMaxPhaseTable = Index{1} << 22;

RVector momentum_ladder(Index n, double cell_length, Index cells, double kappa) {
  const double length = cell_length * static_cast<double>(cells);
  RVector k(n);
  for (Index q = 0; q < n; ++q) {
    const Index signed_q = q < n / 2 ? q : q - n;
    k[q] = 2.0 * kPi * static_cast<double>(signed_q) / length + kappa;
  }
  return k;
}

}  // namespace

struct SplitStepPropagator::Impl {
  LatticeSpec spec;
  Index cell_points;
  Index cells;
  Index n;
  double kappa;
  PropagationParams params;
  double dt;
  RVector cell_x;
  RVector momenta;
  CVector twist;  // exp(i kappa x_j) on the full domain
  // Row i: potential phase for substep midpoint start_time + (i + 1/2) dt,
  // scaled by 1/n to absorb the inverse transform normalization.
  CMatrix table;

  CVector phase_at(double t_mid, double h) const {
    RVector v(cell_points);
    sample_potential(cell_x, t_mid, spec, v);
    CVector out(cell_points);
    const double scale = 1.0 / static_cast<double>(n);
    for (Index j = 0; j < cell_points; ++j) {
      out[j] = std::polar(scale, -v[j] * h / spec.hbar);
    }
    return out;
  }

  CVector kinetic_phase(double h) const {
    CVector out(n);
    for (Index q = 0; q < n; ++q) {
      out[q] = std::polar(1.0, -spec.hbar * momenta[q] * momenta[q] * h / (2.0 * spec.mass));
    }
    return out;
  }

  void run(CMatrix& columns, double start, double duration, bool backward) const {
    if (!(duration > 0.0) || !std::isfinite(duration)) {
      throw ConfigError("propagation duration must be positive");
    }
    if (columns.rows() != n) throw ConfigError("column length does not match propagator grid");
    const double ratio = duration / dt;
    long steps = std::lround(ratio);
    bool regular = steps >= 1 && std::abs(ratio - static_cast<double>(steps)) < 1e-9 * ratio;
    if (!regular) steps = static_cast<long>(std::ceil(ratio));
    const double h = regular ? dt : duration / static_cast<double>(steps);

    long offset = 0;
    bool use_table = regular && table.cols() > 0;
    if (use_table) {
      const double shift = (start - params.start_time) / dt;
      offset = std::lround(shift);
      use_table = std::abs(shift - static_cast<double>(offset)) < 1e-9 * std::max(1.0, shift);
      const long nt = params.substeps_per_period;
      offset = ((offset % nt) + nt) % nt;
    }

    const CVector half = kinetic_phase(0.5 * h);
    const CVector full = half.cwiseProduct(half);
    auto maybe_conj = [&](const CVector& v) -> CVector { return backward ? v.conjugate() : v; };
    const CVector half_k = maybe_conj(half);
    const CVector full_k = maybe_conj(full);

    detail::FftWorkspace ws(n, columns.cols());
    auto buf = ws.data();
    buf = columns;
    buf.array().colwise() *= half_k.array();
    CVector cell_phase(cell_points);
    for (long i = 0; i < steps; ++i) {
      const long k = backward ? steps - 1 - i : i;
      if (use_table) {
        cell_phase = table.col((offset + k) % params.substeps_per_period);
      } else {
        cell_phase = phase_at(start + (static_cast<double>(k) + 0.5) * h, h);
      }
      if (backward) cell_phase = cell_phase.conjugate();
      ws.backward();
      for (Index c = 0; c < cells; ++c) {
        buf.middleRows(c * cell_points, cell_points).array().colwise() *= cell_phase.array();
      }
      ws.forward();
      buf.array().colwise() *= (i + 1 == steps ? half_k : full_k).array();
    }
    columns = buf;
  }
};

SplitStepPropagator::SplitStepPropagator(const LatticeSpec& spec, Index points_per_cell,
                                         Index supercells, double kappa,
                                         const PropagationParams& params)
    : impl_(std::make_unique<Impl>()) {
  spec.validate();
  params.validate();
  if (supercells < 1) throw ConfigError("supercell count must be >= 1");
  if (std::abs(kappa) > spec.zone_edge() * (1.0 + 1e-12)) {
    throw ConfigError("quasimomentum outside the first Brillouin zone");
  }
  Impl& m = *impl_;
  m.spec = spec;
  m.cell_points = points_per_cell;
  m.cells = supercells;
  m.n = points_per_cell * supercells;
  m.kappa = kappa;
  m.params = params;
  m.dt = spec.period() / static_cast<double>(params.substeps_per_period);
  const SupercellGrid grid(spec, points_per_cell);
  m.cell_x = grid.positions();
  m.momenta = momentum_ladder(m.n, spec.cell_length(), supercells, kappa);
  m.twist.resize(m.n);
  for (Index j = 0; j < m.n; ++j) m.twist[j] = std::polar(1.0, kappa * grid.spacing() * j);
  if (params.substeps_per_period * points_per_cell <= kMaxPhaseTable) {
    m.table.resize(points_per_cell, params.substeps_per_period);
    for (long i = 0; i < params.substeps_per_period; ++i) {
      m.table.col(i) = m.phase_at(params.start_time + (static_cast<double>(i) + 0.5) * m.dt, m.dt);
    }
  }
}

SplitStepPropagator::~SplitStepPropagator() = default;
SplitStepPropagator::SplitStepPropagator(SplitStepPropagator&&) noexcept = default;
SplitStepPropagator& SplitStepPropagator::operator=(SplitStepPropagator&&) noexcept = default;

Index SplitStepPropagator::size() const { return impl_->n; }
double SplitStepPropagator::kappa() const { return impl_->kappa; }
double SplitStepPropagator::substep() const { return impl_->dt; }
const RVector& SplitStepPropagator::momenta() const { return impl_->momenta; }

void SplitStepPropagator::advance_momentum(CMatrix& columns, double start_time, double duration,
                                           bool backward) const {
  impl_->run(columns, start_time, duration, backward);
}

ComplexState SplitStepPropagator::advance(const ComplexState& state, double start_time,
                                          double duration, bool backward) const {
  const Impl& m = *impl_;
  if (state.size() != m.n) throw ConfigError("state size does not match propagator grid");
  detail::FftWorkspace ws(m.n, 1);
  auto buf = ws.data();
  buf.col(0) = state.amplitudes.cwiseProduct(m.twist.conjugate());
  ws.forward();
  CMatrix coeffs = buf;
  m.run(coeffs, start_time, duration, backward);
  buf = coeffs;
  ws.backward();
  ComplexState out{CVector(m.n), state.spacing};
  out.amplitudes = buf.col(0).cwiseProduct(m.twist) / static_cast<double>(m.n);
  return out;
}

Index points_per_cell_of(const ComplexState& state, const LatticeSpec& spec) {
  if (!(state.spacing > 0.0)) throw ConfigError("state has no grid spacing");
  const double ratio = spec.cell_length() / state.spacing;
  const Index points = static_cast<Index>(std::llround(ratio));
  if (points < 1 || std::abs(ratio - static_cast<double>(points)) > 1e-8 * ratio ||
      state.size() % points != 0) {
    throw ConfigError("state grid is not a whole number of supercells");
  }
  return points;
}

namespace {

void require_one_cell(const ComplexState& state, const LatticeSpec& spec) {
  if (points_per_cell_of(state, spec) != state.size()) {
    throw ConfigError("twisted evolution expects a single-supercell state");
  }
}

}  // namespace

ComplexState evolve_twisted(const ComplexState& state, double kappa, const LatticeSpec& spec,
                            const PropagationParams& params, double duration) {
  require_one_cell(state, spec);
  SplitStepPropagator prop(spec, state.size(), 1, kappa, params);
  return prop.advance(state, params.start_time, duration);
}

ComplexState evolve_twisted_backward(const ComplexState& state, double kappa,
                                     const LatticeSpec& spec, const PropagationParams& params,
                                     double duration) {
  require_one_cell(state, spec);
  SplitStepPropagator prop(spec, state.size(), 1, kappa, params);
  return prop.advance(state, params.start_time, duration, true);
}

ComplexState evolve_ring(const ComplexState& state, const LatticeSpec& spec,
                         const PropagationParams& params, double duration) {
  const Index points = points_per_cell_of(state, spec);
  SplitStepPropagator prop(spec, points, state.size() / points, 0.0, params);
  return prop.advance(state, params.start_time, duration);
}

ComplexState evolve_ring_backward(const ComplexState& state, const LatticeSpec& spec,
                                  const PropagationParams& params, double duration) {
  const Index points = points_per_cell_of(state, spec);
  SplitStepPropagator prop(spec, points, state.size() / points, 0.0, params);
  return prop.advance(state, params.start_time, duration, true);
}

double energy_expectation(const ComplexState& state, double kappa, const LatticeSpec& spec,
                          double t) {
  const Index points = points_per_cell_of(state, spec);
  const Index cells = state.size() / points;
  const Index n = state.size();
  const RVector k = momentum_ladder(n, spec.cell_length(), cells, kappa);
  detail::FftWorkspace ws(n, 1);
  auto buf = ws.data();
  for (Index j = 0; j < n; ++j) {
    buf(j, 0) = state.amplitudes[j] * std::polar(1.0, -kappa * state.spacing * j);
  }
  ws.forward();
  // sum_j |u_j|^2 dx = (dx / n) sum_q |c_q|^2
  double kinetic = 0.0;
  for (Index q = 0; q < n; ++q) {
    kinetic += std::norm(buf(q, 0)) * spec.hbar * spec.hbar * k[q] * k[q] / (2.0 * spec.mass);
  }
  kinetic *= state.spacing / static_cast<double>(n);
  double pot = 0.0;
  for (Index j = 0; j < n; ++j) {
    pot += std::norm(state.amplitudes[j]) * potential(state.spacing * j, t, spec);
  }
  pot *= state.spacing;
  return kinetic + pot;
}

}  // namespace floq
