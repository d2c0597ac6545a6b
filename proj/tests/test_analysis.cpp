#include "floq/analysis.hpp"
#include "floq/errors.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace floq;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.lattice = test::small_spec();
  c.points = 48;
  c.horizon = 60;
  c.omega_grid = {0.8, 1.2, 0.1};
  return c;
}

std::string csv(const SweepResult& r) {
  std::ostringstream out;
  write_sweep_csv(out, r);
  return out.str();
}

}  // namespace

TEST_CASE("undriven sweep point stays equipartitioned") {
  auto c = small_config();
  c.lattice.amplitude = 0.0;
  c.substeps = 4096;
  const auto r = sweep_point(c, 1.0);
  REQUIRE(r.ok());
  CHECK(std::abs(r.n_max - 1.0 / 3) < 1e-10);
  CHECK(r.overlap > 0.5);
  CHECK(r.overlap <= 1.0);
  CHECK(std::abs(r.eps_fgs) <= 0.65);
  c.substeps = 2048;
  const auto other = sweep_point(c, 2.0);
  CHECK(std::abs(other.overlap - r.overlap) < 1e-8);
}

TEST_CASE("sweeps are complete, ordered and independent of the worker count") {
  auto c = small_config();
  const auto one = run_sweep(c);
  REQUIRE(one.records.size() == 5);
  for (std::size_t i = 1; i < one.records.size(); ++i) CHECK(one.records[i].omega > one.records[i - 1].omega);
  for (const auto& r : one.records) {
    CHECK(r.ok());
    CHECK(r.n_max >= 0);
    CHECK(r.n_max <= 1);
    CHECK(r.gap >= 0);
  }
  CHECK(one.failures() == 0);
  c.workers = 3;
  CHECK(csv(run_sweep(c)) == csv(one));

  std::istringstream in(csv(one));
  const auto back = read_sweep_csv(in);
  REQUIRE(back.records.size() == one.records.size());
  for (std::size_t i = 0; i < back.records.size(); ++i) {
    CHECK(back.records[i].omega == one.records[i].omega);
    CHECK(back.records[i].n_max == one.records[i].n_max);
    CHECK(back.records[i].overlap == one.records[i].overlap);
    CHECK(back.records[i].argmax_period == one.records[i].argmax_period);
  }
}

TEST_CASE("failed sweep points are reported, not dropped") {
  SweepResult r;
  r.records.resize(3);
  for (int i = 0; i < 3; ++i) r.records[i].omega = 1.0 + i;
  r.records[1].error = "monodromy not unitary";
  CHECK(r.failures() == 1);
  const auto text = csv(r);
  CHECK(text.find("omega,n_max,argmax_site,argmax_m,overlap,eps_fgs,gap\n") != std::string::npos);
  CHECK(text.find("2,nan,-1,-1,nan,nan,nan") != std::string::npos);
  std::istringstream in(text);
  const auto back = read_sweep_csv(in);
  CHECK(back.failures() == 1);
  std::istringstream junk("a,b\n1,2\n");
  CHECK_THROWS_AS(read_sweep_csv(junk), ConfigError);
}

TEST_CASE("overlap dips and n_max peaks") {
  SweepResult r;
  const double values[] = {0.9, 0.8, 0.85, 0.88, 0.5, 0.87, 0.9, 0.89};
  for (int i = 0; i < 8; ++i) {
    SweepRecord rec;
    rec.omega = 2.0 + 0.1 * i;
    rec.overlap = values[i];
    rec.n_max = 1 - values[i];
    r.records.push_back(rec);
  }
  const auto all = overlap_dips(r, 0.0);
  REQUIRE(all.size() == 2);
  const auto deep = overlap_dips(r, 0.2);
  REQUIRE(deep.size() == 1);
  CHECK(deep[0].grid_index == 4);
  const auto peaks = nmax_peaks(r, 0.45);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].grid_index == 4);
}

TEST_CASE("free particle resonance report has zero residuals") {
  LatticeSpec spec;
  spec.barrier_height = 0.0;
  // Exact crossings: the overlap drops on every prediction in [2, 3] and nowhere else.
  SweepResult r;
  auto add = [&](double w, double v) {
    SweepRecord rec;
    rec.omega = w;
    rec.overlap = v;
    r.records.push_back(rec);
  };
  add(2.0, 1.0);
  for (const auto& p : predict_resonances(spec, 20, 2)) {
    if (p.omega < 2.0 || p.omega > 3.0) continue;
    add(p.omega - 0.01, 1.0);
    add(p.omega, 0.5);
    add(p.omega + 0.01, 1.0);
  }
  add(3.0, 1.0);
  std::sort(r.records.begin(), r.records.end(), [](auto& a, auto& b) { return a.omega < b.omega; });
  const auto rows = report_resonances(spec, r, 20, 2);
  REQUIRE(rows.size() == 5);
  for (const auto& row : rows) {
    REQUIRE(row.residual);
    CHECK(std::abs(*row.residual) < 1e-12);
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (rows[i].folds == rows[j].folds && rows[i].alpha > rows[j].alpha) {
        CHECK(rows[i].omega_res > rows[j].omega_res);
      }
    }
  }
  CHECK_THROWS_AS(report_resonances(spec, SweepResult{}), ConfigError);
}

TEST_CASE("evolution variants on a small ring") {
  auto c = small_config();
  c.domain = DomainKind::ring;
  c.supercells = 4;
  c.basis = kAllModes;
  c.horizon = 20;
  c.initial = InitialStateSpec::gaussian(10.0, 1.5);
  EvolutionOptions opts;
  opts.snapshots = {0, 5};
  const auto fl = run_evolution(c, opts);
  REQUIRE(fl.trace.populations.rows() == 21);
  REQUIRE(fl.snapshots.size() == 2);
  CHECK(fl.snapshots[1].first == 5);
  CHECK(fl.residual < 1e-10);
  opts.method = EvolutionMethod::direct;
  const auto dr = run_evolution(c, opts);
  CHECK((fl.trace.populations - dr.trace.populations).cwiseAbs().maxCoeff() < 1e-3);
  opts.keep_modes = 2;
  CHECK_THROWS_AS(run_evolution(c, opts), ConfigError);

  c.initial = InitialStateSpec::gaussian(10.0, 10.0);
  CHECK_THROWS_AS(run_evolution(c, {}), ConfigError);

  std::ostringstream out;
  write_metadata(out, c);
  write_evolution_csv(out, fl.trace, c.lattice);
  const auto text = out.str();
  CHECK(text.rfind("# floq ", 0) == 0);
  CHECK(text.find("m,t,s,n_s\n") != std::string::npos);
  CHECK(text.find("# config_hash " + config_hash(c)) != std::string::npos);
}

TEST_CASE("modes csv") {
  const auto spec = test::small_spec();
  const auto s = solve_floquet(spec, 48, 0.0, {}, 3);
  std::ostringstream out;
  write_modes_csv(out, {s});
  const auto text = out.str();
  CHECK(text.rfind("kappa,alpha,eps,x,re_phi,im_phi\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 48);
}
