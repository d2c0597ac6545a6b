#include "floq/dynamics.hpp"
#include "floq/errors.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace floq;

namespace {

constexpr Index kCells = 4;
constexpr Index kPoints = 48;

std::shared_ptr<const RingSpectra> small_ring_spectra(const LatticeSpec& spec, Index basis = kAllModes) {
  FloquetSolveOptions opts;
  opts.basis_size = basis;
  const RingDomain ring(SupercellGrid(spec, kPoints), kCells);
  return std::make_shared<const RingSpectra>(solve_ring_spectra(spec, ring, opts));
}

ComplexState extend(const FloquetMode& mode, Index j) {
  ComplexState out{CVector(kCells * kPoints), mode.samples.spacing};
  for (Index c = 0; c < kCells; ++c) {
    out.amplitudes.segment(c * kPoints, kPoints) =
        mode.samples.amplitudes * std::polar(1.0, 2 * kPi * j * c / kCells) / std::sqrt(double(kCells));
  }
  return out;
}

RingDomain small_ring(const LatticeSpec& spec) { return RingDomain(SupercellGrid(spec, kPoints), kCells); }

}  // namespace

TEST_CASE("ring spectra cover every quasimomentum with continued bands") {
  const auto spec = test::small_spec();
  const auto rs = small_ring_spectra(spec, 9);
  CHECK(rs->spectra.size() == kCells);
  CHECK(rs->kappas.size() == kCells);
  for (const auto& s : rs->spectra) {
    CHECK(s.modes.size() == 9);
    for (Index a = 0; a < 9; ++a) CHECK(s.modes[a].label == a);
  }
  CHECK(bands_ambiguous(*rs, {}) == false);
}

TEST_CASE("a single Floquet-Bloch mode decomposes onto itself") {
  const auto spec = test::small_spec();
  const auto rs = small_ring_spectra(spec);
  const Index j = 1, beta = 2;
  const auto psi = extend(rs->spectra[j].modes[beta], j);
  const auto dec = decompose(psi, rs);
  CMatrix expected = CMatrix::Zero(dec.modes(), kCells);
  expected(beta, j) = 1.0;
  CHECK((dec.coefficients - expected).cwiseAbs().maxCoeff() < 1e-8);

  // Stationary populations.
  const auto trace = population_trace(dec, 30);
  for (Index m = 1; m <= 30; ++m) {
    CHECK((trace.populations.row(m) - trace.populations.row(0)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("the uniform state only has kappa = 0 components") {
  const auto spec = test::small_spec();
  const auto rs = small_ring_spectra(spec);
  const auto psi = make_initial_state(InitialStateSpec::uniform(), small_ring(spec));
  const auto dec = decompose(psi, rs);
  for (Index j = 1; j < kCells; ++j) CHECK(dec.coefficients.col(j).cwiseAbs().maxCoeff() < 1e-10);
  // Keeping only the ground band of a kappa = 0 state gives frozen populations.
  const auto fgs = keep_bands(dec, {0});
  const auto trace = population_trace(fgs, 20);
  CHECK((trace.populations.rowwise() - trace.populations.row(0)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("completeness and reconstruction") {
  const auto spec = test::small_spec();
  const auto rs = small_ring_spectra(spec);
  const auto psi = make_initial_state(InitialStateSpec::gaussian(10.0, 1.5), small_ring(spec));
  const auto dec = decompose(psi, rs);
  CHECK(std::abs(dec.captured_weight() + dec.residual - 1) < 1e-10);
  CHECK(std::abs(dec.residual) < 1e-10);
  CHECK(test::max_diff(stroboscopic_evolve(dec, 0), psi) < 1e-4);

  const auto same = truncate_modes(dec, dec.modes());
  CHECK(same.coefficients == dec.coefficients);
  CHECK_THROWS_AS(truncate_modes(dec, 0), ConfigError);
  CHECK_THROWS_AS(stroboscopic_evolve(dec, -1), ConfigError);

  const auto two = truncate_modes(dec, 2);
  CHECK(two.coefficients.bottomRows(dec.modes() - 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(two.coefficients.topRows(2) == dec.coefficients.topRows(2));
  // No renormalization after truncation.
  CHECK(stroboscopic_evolve(two, 0).norm_squared() < 1.0);

  // Two-band reconstruction at m = 0 is the truncated initial state.
  const auto kept = keep_bands(dec, {0, 3});
  CHECK(test::max_diff(two_band_reconstruct(dec, 3, 0), stroboscopic_evolve(kept, 0)) < 1e-14);
  CHECK(test::max_diff(two_band_reconstruct(dec, 3, 7), stroboscopic_evolve(kept, 7)) < 1e-12);
  CHECK_THROWS_AS(two_band_reconstruct(dec, 0, 1), ConfigError);
}

TEST_CASE("small basis is reported as a large residual") {
  const auto spec = test::small_spec();
  const auto rs = small_ring_spectra(spec, 3);
  const auto psi = make_initial_state(InitialStateSpec::gaussian(10.0, 0.5), small_ring(spec));
  CHECK_THROWS_AS(decompose(psi, rs), NumericalError);
  const auto loose = decompose(psi, rs, 1.0);
  CHECK(loose.residual > 1e-4);
  CHECK(std::abs(loose.captured_weight() + loose.residual - 1) < 1e-10);
  const ComplexState wrong{CVector::Ones(kPoints), psi.spacing};
  CHECK_THROWS_AS(decompose(wrong, rs), ConfigError);
}

TEST_CASE("Floquet reconstruction agrees with direct integration") {
  const auto spec = test::small_spec();
  const auto rs = small_ring_spectra(spec);
  const auto psi = make_initial_state(InitialStateSpec::gaussian(10.0, 1.5), small_ring(spec));
  const auto floquet = population_trace(decompose(psi, rs), 40);
  const auto direct = direct_population_trace(psi, spec, {}, 40);
  REQUIRE(floquet.populations.rows() == 41);
  REQUIRE(floquet.sites() == 12);
  CHECK((floquet.populations - direct.populations).cwiseAbs().maxCoeff() < 1e-3);
  for (Index m = 0; m <= 40; ++m) {
    CHECK(std::abs(floquet.populations.row(m).sum() - 1) < 1e-8);
    CHECK(floquet.populations.row(m).minCoeff() >= 0);
    CHECK(floquet.populations.row(m).maxCoeff() <= 1);
  }
}

TEST_CASE("populations do not depend on the mode gauge") {
  const auto spec = test::small_spec();
  const auto rs = small_ring_spectra(spec);
  auto perturbed = std::make_shared<RingSpectra>(*rs);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  for (auto& s : perturbed->spectra) {
    for (auto& m : s.modes) {
      const Complex z = std::polar(1.0, phase(rng));
      m.samples.amplitudes *= z;
      m.coefficients *= z;
    }
  }
  const auto psi = make_initial_state(InitialStateSpec::gaussian(13.0, 1.5), small_ring(spec));
  const auto a = population_trace(truncate_modes(decompose(psi, rs), 5), 25);
  const auto b = population_trace(truncate_modes(decompose(psi, perturbed), 5), 25);
  CHECK((a.populations - b.populations).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("equal phases keep uniform populations in the Floquet picture") {
  auto spec = test::small_spec();
  spec.phases = {0.0, 0.0, 0.0};
  const auto rs = small_ring_spectra(spec);
  const auto psi = make_initial_state(InitialStateSpec::uniform(), small_ring(spec));
  const auto trace = population_trace(decompose(psi, rs), 50);
  CHECK((trace.populations.array() - 1.0 / 12).abs().maxCoeff() < 1e-10);
}

TEST_CASE("site populations") {
  LatticeSpec spec;
  const SupercellGrid grid(spec, 240);
  const RVector p = site_populations(make_initial_state(InitialStateSpec::uniform(), grid), spec, true);
  for (Index s = 0; s < 3; ++s) CHECK(p[s] == doctest::Approx(1.0 / 3).epsilon(1e-14));
  const auto r = test::random_state(240, grid.spacing(), 8);
  CHECK(std::abs(site_populations(r, spec).sum() - 1) < 1e-8);
}

TEST_CASE("interference period") {
  CHECK(interference_period(0.0, 1.0 / 77, 1.0) == doctest::Approx(77.0).epsilon(1e-12));
  CHECK(interference_period(0.25, -0.25, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(interference_period(0.45, -0.45, 1.0) == doctest::Approx(10.0).epsilon(1e-10));
  CHECK(interference_period(0.0, 0.3, 2.0, 0.5) == doctest::Approx(10.0 / 3).epsilon(1e-12));
  CHECK_THROWS_AS(interference_period(0.1, 0.1, 1.0), DegeneratePairError);
}

TEST_CASE("dominant period of a synthetic series") {
  RVector x(800);
  for (Index i = 0; i < 800; ++i) x[i] = 0.3 + 0.1 * std::cos(2 * kPi * i / 76.8 + 0.4) + 0.02 * std::cos(2 * kPi * i / 9.0);
  CHECK(dominant_period(x) == doctest::Approx(76.8).epsilon(1e-3));
  CHECK_THROWS_AS(dominant_period(RVector::Zero(4)), ConfigError);
}

TEST_CASE("peak to peak") {
  PopulationTrace t;
  t.periods = {0, 1, 2, 3};
  t.populations.resize(4, 1);
  t.populations << 0.1, 0.5, 0.3, 0.9;
  CHECK(peak_to_peak(t, 0, 0, 2) == doctest::Approx(0.4));
  CHECK(peak_to_peak(t, 0, 0, 3) == doctest::Approx(0.8));
  CHECK_THROWS_AS(peak_to_peak(t, 0, 5, 9), ConfigError);
}

TEST_CASE("central sites") {
  LatticeSpec spec;
  CHECK(central_sites(spec, 16, 0.0) == std::vector<Index>{0, 1, 2});
  CHECK(central_sites(spec, 16, 240.0) == std::vector<Index>{24, 25, 26});
  CHECK(central_sites(spec, 16, 478.0) == std::vector<Index>{0, 1, 2});
}
