#include "floq/errors.hpp"
#include "floq/lattice.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace floq;

TEST_CASE("isolated barrier peaks at V0") {
  LatticeSpec spec;
  for (double t : {0.0, 0.7, 3.1}) {
    for (long s : {0L, 1L, 2L, 5L}) {
      const double x = s * spec.spacing + spec.displacement(s, t);
      CHECK(potential(x, t, spec) == doctest::Approx(spec.barrier_height).epsilon(1e-15));
    }
  }
}

TEST_CASE("static lattice is negligible halfway between barriers") {
  LatticeSpec spec;
  spec.amplitude = 0.0;
  const double v = potential(spec.spacing / 2, 0.3, spec);
  CHECK(v == doctest::Approx(2.0 * std::exp(-100.0)).epsilon(1e-10));
  CHECK(v < 1e-40);
}

TEST_CASE("potential is periodic in space and time") {
  LatticeSpec spec;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-50.0, 50.0), ut(0.0, 20.0);
  for (int i = 0; i < 200; ++i) {
    const double x = ux(rng), t = ut(rng);
    const double v = potential(x, t, spec);
    CHECK(std::abs(potential(x + spec.cell_length(), t, spec) - v) < 1e-13);
    CHECK(std::abs(potential(x, t + spec.period(), spec) - v) < 1e-13);
  }
}

TEST_CASE("equal phases make the potential L-periodic") {
  LatticeSpec spec;
  spec.phases = {0.4, 0.4, 0.4};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-30.0, 30.0), ut(0.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double x = ux(rng), t = ut(rng);
    CHECK(std::abs(potential(x + spec.spacing, t, spec) - potential(x, t, spec)) < 1e-13);
  }
}

TEST_CASE("sample_potential agrees with pointwise evaluation") {
  LatticeSpec spec;
  const SupercellGrid grid(spec, 240);
  RVector v(grid.size());
  sample_potential(grid.positions(), 1.3, spec, v);
  for (Index j = 0; j < grid.size(); j += 17) CHECK(v[j] == potential(grid.position(j), 1.3, spec));
}

TEST_CASE("lattice invariants are enforced") {
  auto bad = [](auto mutate) {
    LatticeSpec spec;
    mutate(spec);
    return spec;
  };
  CHECK_NOTHROW(LatticeSpec{}.validate());
  CHECK_THROWS_AS(bad([](LatticeSpec& s) { s.mass = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](LatticeSpec& s) { s.hbar = -1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](LatticeSpec& s) { s.barrier_width = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](LatticeSpec& s) { s.spacing = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](LatticeSpec& s) { s.frequency = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](LatticeSpec& s) { s.amplitude = -0.1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](LatticeSpec& s) { s.barrier_height = -1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](LatticeSpec& s) { s.sites_per_cell = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](LatticeSpec& s) { s.phases = {0.0, 1.0}; }).validate(), ConfigError);
}

TEST_CASE("grids") {
  LatticeSpec spec;
  CHECK(spec.period() == doctest::Approx(2 * kPi));
  CHECK(spec.cell_length() == 30.0);
  const SupercellGrid grid(spec, 480);
  CHECK(grid.spacing() == doctest::Approx(30.0 / 480));
  CHECK(grid.position(0) == 0.0);
  CHECK(grid.position(479) < grid.length());
  CHECK_THROWS_AS(SupercellGrid(spec, 100), ConfigError);  // dx > width / 4

  CHECK(default_points_per_cell(spec) == 240);
  CHECK(default_points_per_cell(spec) % spec.sites_per_cell == 0);
  CHECK(30.0 / 240 <= spec.barrier_width / 4);

  const RingDomain ring(grid, 16);
  CHECK(ring.size() == 16 * 480);
  CHECK(ring.length() == 480.0);
  const auto kappas = ring.kappas();
  REQUIRE(kappas.size() == 16);
  CHECK(kappas[0] == 0.0);
  CHECK(kappas[1] == doctest::Approx(2 * kPi / 480));
  for (double k : kappas) CHECK(std::abs(k) <= spec.zone_edge() * (1 + 1e-12));
  CHECK(kappas[15] == doctest::Approx(-2 * kPi / 480));
  CHECK_THROWS_AS(RingDomain(grid, 0), ConfigError);
}

TEST_CASE("uniform state") {
  LatticeSpec spec;
  const SupercellGrid grid(spec, 240);
  const auto psi = make_initial_state(InitialStateSpec::uniform(), grid);
  CHECK(psi.amplitudes[17].real() == doctest::Approx(1 / std::sqrt(30.0)).epsilon(1e-14));
  CHECK(std::abs(psi.amplitudes[17].real() - 0.1826) < 1e-4);
  CHECK(std::abs(psi.norm_squared() - 1) < 1e-12);
}

TEST_CASE("gaussian on the reference ring") {
  LatticeSpec spec;
  const RingDomain ring(SupercellGrid(spec, 240), 16);
  const auto init = InitialStateSpec::gaussian(240.0, 20 * kPi);
  // Half a ring away the packet is still at exp(-7.3) of its peak.
  CHECK_THROWS_AS(make_initial_state(init, ring), ConfigError);
  const auto psi = make_initial_state(init, ring, 1e-3);
  CHECK(std::abs(psi.norm_squared() - 1) < 1e-12);
  Index peak = 0;
  psi.amplitudes.cwiseAbs().maxCoeff(&peak);
  CHECK(ring.position(peak) == doctest::Approx(240.0));

  // Momentum spread from a direct DFT of the samples.
  const Index n = psi.size();
  double w = 0, k2 = 0;
  for (Index q = -n / 2; q < n / 2; ++q) {
    const double k = 2 * kPi * q / ring.length();
    if (std::abs(k) > 0.3) continue;  // |psi~|^2 is below 1e-150 there
    Complex c{0, 0};
    for (Index j = 0; j < n; ++j) c += psi.amplitudes[j] * std::polar(1.0, -k * ring.position(j));
    w += std::norm(c);
    k2 += std::norm(c) * k * k;
  }
  const double sigma_k = std::sqrt(k2 / w);
  CHECK(sigma_k == doctest::Approx(1 / (20 * kPi * std::sqrt(2.0))).epsilon(0.01));
}

TEST_CASE("gaussian wraps to its minimal image") {
  LatticeSpec spec;
  const SupercellGrid grid(spec, 240);
  const auto psi = make_initial_state(InitialStateSpec::gaussian(0.0, 2.0), grid);
  CHECK(std::abs(psi.amplitudes[1] - psi.amplitudes[239]) < 1e-14);
  CHECK_THROWS_AS(make_initial_state(InitialStateSpec::gaussian(0.0, 0.0), grid), ConfigError);
  CHECK_THROWS_AS(make_initial_state(InitialStateSpec::gaussian(0.0, 10.0), grid), ConfigError);
}

TEST_CASE("inner product") {
  LatticeSpec spec;
  const SupercellGrid grid(spec, 240);
  const auto a = test::random_state(240, grid.spacing(), 1);
  const auto b = test::random_state(240, grid.spacing(), 2);
  CHECK(std::abs(inner(a, a) - 1.0) < 1e-12);
  CHECK(std::abs(inner(a, b) - std::conj(inner(b, a))) < 1e-15);
  CHECK(inner(a, a).real() >= 0);

  const Complex z{0.3, -1.2};
  ComplexState zb = b;
  zb.amplitudes *= z;
  CHECK(std::abs(inner(a, zb) - z * inner(a, b)) < 1e-14);
  ComplexState za = a;
  za.amplitudes *= z;
  CHECK(std::abs(inner(za, b) - std::conj(z) * inner(a, b)) < 1e-14);

  auto wave = [&](int q) {
    ComplexState s{CVector(240), grid.spacing()};
    for (Index j = 0; j < 240; ++j) s.amplitudes[j] = std::polar(1.0, 2 * kPi * q * grid.position(j) / 30.0);
    return s;
  };
  CHECK(std::abs(inner(wave(3), wave(5))) < 1e-12);
  CHECK(std::abs(inner(wave(-7), wave(7))) < 1e-12);

  const ComplexState other{CVector::Zero(480), 30.0 / 480};
  CHECK_THROWS_AS(inner(a, other), ConfigError);
}

TEST_CASE("overlap of the uniform state with a gaussian") {
  LatticeSpec spec;
  const double sigma = 2.0;
  auto overlap = [&](Index points) {
    const SupercellGrid grid(spec, points);
    const auto u = make_initial_state(InitialStateSpec::uniform(), grid);
    const auto g = make_initial_state(InitialStateSpec::gaussian(15.0, sigma), grid);
    return inner(u, g);
  };
  const Complex coarse = overlap(240);
  const Complex fine = overlap(480);
  CHECK(std::abs(coarse.imag()) < 1e-15);
  CHECK(coarse.real() > 0);
  CHECK(std::abs(coarse - fine) < 1e-12);
  const double analytic = std::pow(kPi * sigma * sigma, -0.25) * sigma * std::sqrt(2 * kPi) / std::sqrt(30.0);
  CHECK(coarse.real() == doctest::Approx(analytic).epsilon(1e-10));
}

TEST_CASE("site probabilities") {
  LatticeSpec spec;
  const SupercellGrid grid(spec, 240);
  const auto u = make_initial_state(InitialStateSpec::uniform(), grid);
  const RVector p = site_probabilities(u, spec, true);
  REQUIRE(p.size() == 3);
  for (Index s = 0; s < 3; ++s) CHECK(std::abs(p[s] - 1.0 / 3) < 1e-14);

  const auto r = test::random_state(240, grid.spacing(), 5);
  CHECK(std::abs(site_probabilities(r, spec).sum() - 1) < 1e-12);

  // A packet on the s = 1 barrier region [0, L) lands in site 1.
  const auto g = make_initial_state(InitialStateSpec::gaussian(5.0, 1.0), grid);
  const RVector pg = site_probabilities(g, spec);
  CHECK(pg[1] > 0.999);

  const SupercellGrid odd(spec, 242);
  const auto uo = make_initial_state(InitialStateSpec::uniform(), odd);
  CHECK_THROWS_AS(site_probabilities(uo, spec, true), ConfigError);
  const RVector po = site_probabilities(uo, spec);
  for (Index s = 0; s < 3; ++s) CHECK(std::abs(po[s] - 1.0 / 3) < 1e-12);
}

TEST_CASE("ring site probabilities wrap site 0") {
  LatticeSpec spec;
  const RingDomain ring(SupercellGrid(spec, 240), 4);
  const auto g = make_initial_state(InitialStateSpec::gaussian(115.0, 1.0), ring);
  const RVector p = site_probabilities(g, spec, true);
  REQUIRE(p.size() == 12);
  CHECK(p[0] > 0.999);
  CHECK(std::abs(p.sum() - 1) < 1e-12);
}
