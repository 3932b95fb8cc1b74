#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "doctest.h"
#include "vma/dynamics.hpp"
#include "vma/errors.hpp"
#include "vma/reference.hpp"

using namespace vma;

namespace {

constexpr double kPi = std::numbers::pi;

ParticleCloud single(const Geometry& g, Vec x, Vec xi, double eps) {
  ParticleCloud c;
  c.geometry = g;
  c.positions = {x};
  c.velocities = {xi};
  c.epsilon = eps;
  return c;
}

// Empirical CDF sup-gap against the exact CDF of 1 + a sin(2 pi x).
double cdf_gap(const ParticleCloud& cloud, double a) {
  auto F = [a](double x) { return x - a * std::cos(2 * kPi * x) / (2 * kPi) + a / (2 * kPi); };
  std::vector<double> xs;
  for (const Vec& p : cloud.positions) xs.push_back(p[0]);
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double gap = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    gap = std::max(gap, std::abs(F(xs[j]) - j / n));
    gap = std::max(gap, std::abs(F(xs[j]) - (j + 1) / n));
  }
  return gap;
}

}  // namespace

TEST_CASE("oscillator: equilibrium stays put") {
  ParticleCloud c = single(Geometry::torus(2), {0.3, 0.4, 0}, {0, 0, 0}, 0.1);
  const std::vector<Vec> w{{0, 0, 0}};
  advance_oscillators(c, w, 0.37);
  CHECK(c.positions[0][0] == 0.3);
  CHECK(c.positions[0][1] == 0.4);
  CHECK(c.time == doctest::Approx(0.37));
}

TEST_CASE("oscillator: quarter period rotation") {
  const double eps = 0.2;
  const Vec w0{0.01, -0.02, 0}, xi0{0.3, 0.1, 0};
  const Vec a{0.5, 0.5, 0};
  ParticleCloud c = single(Geometry::torus(2), a + w0, xi0, eps);
  const std::vector<Vec> w{w0};
  advance_oscillators(c, w, 0.5 * kPi * eps);
  for (int k = 0; k < 2; ++k) {
    CHECK(c.positions[0][k] - a[k] == doctest::Approx(eps * xi0[k]).epsilon(1e-12));
    CHECK(c.velocities[0][k] == doctest::Approx(-w0[k] / eps).epsilon(1e-12));
  }
}

TEST_CASE("oscillator: full period and time reversal") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0), s(-0.5, 0.5);
  ParticleCloud c;
  c.geometry = Geometry::torus(2);
  c.epsilon = 0.1;
  std::vector<Vec> w;
  for (int i = 0; i < 50; ++i) {
    c.positions.push_back({u(rng), u(rng), 0});
    c.velocities.push_back({s(rng), s(rng), 0});
    w.push_back({0.02 * s(rng), 0.02 * s(rng), 0});
  }
  const ParticleCloud start = c;
  const ParticleCloud period = oscillator_step(c, w, 2 * kPi * c.epsilon);
  advance_oscillators(c, w, 0.013);
  std::vector<Vec> w_now;
  for (std::size_t i = 0; i < c.size(); ++i) {
    Vec d = displacement(c.geometry, start.positions[i], c.positions[i]);
    w_now.push_back(w[i] + d);
  }
  advance_oscillators(c, w_now, -0.013);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int k = 0; k < 2; ++k) {
      CHECK(std::abs(displacement(c.geometry, start.positions[i], period.positions[i])[k]) < 1e-12);
      CHECK(period.velocities[i][k] == doctest::Approx(start.velocities[i][k]).epsilon(1e-12));
      CHECK(std::abs(displacement(c.geometry, start.positions[i], c.positions[i])[k]) < 1e-12);
      CHECK(std::abs(c.velocities[i][k] - start.velocities[i][k]) < 1e-12);
    }
  }
}

TEST_CASE("oscillator conserves frozen-sigma energy") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(2), 8);
  ParticleCloud c = init_monokinetic(grid, EulerFlow::taylor_green(0.5).initial_velocity(), 0.1);
  Assignment id;
  id.sigma.resize(grid.size());
  std::iota(id.sigma.begin(), id.sigma.end(), 0);
  const double e0 = energy(c, grid, id).total;
  for (int s = 0; s < 20; ++s) {
    const auto w = anchor_offsets(c, grid, id);
    advance_oscillators(c, w, 0.0031);
    CHECK(std::abs(energy(c, grid, id).total - e0) <= 1e-12 * e0);
  }
}

TEST_CASE("init_monokinetic sits on the grid") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(2), 4);
  const EulerFlow tg = EulerFlow::taylor_green(0.5);
  const ParticleCloud c = init_monokinetic(grid, tg.initial_velocity(), 0.1);
  Assignment id;
  id.sigma.resize(grid.size());
  std::iota(id.sigma.begin(), id.sigma.end(), 0);
  CHECK(energy(c, grid, id).potential == 0.0);
  CHECK(modulated_energy_euler(c, grid, id, tg) == 0.0);
  CHECK(c.time == 0.0);
  CHECK_THROWS_AS(init_monokinetic(grid, {}, 0.0), ArgumentError);
}

TEST_CASE("init_from_density: uniform density reproduces the grid") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(2), 8);
  const ParticleCloud c = init_from_density(grid, Density::uniform(), {}, 0.1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(c.positions[i][0] == doctest::Approx(grid[i][0]).epsilon(1e-15));
    CHECK(c.positions[i][1] == doctest::Approx(grid[i][1]).epsilon(1e-15));
  }
}

TEST_CASE("init_from_density: CDF gap and refinement") {
  const double a = 0.1;
  auto rho = [a](double x) { return 1.0 + a * std::sin(2 * kPi * x); };
  double prev = 0.0;
  for (int n : {64, 256, 1024}) {
    const TargetGrid grid = TargetGrid::lattice(Geometry::torus(1), n);
    const ParticleCloud c = init_from_density(grid, Density::along_axes({rho, {}, {}}), {}, 0.1);
    const double gap = cdf_gap(c, a);
    CHECK(gap <= 1.0 / n);
    if (prev > 0.0) CHECK(prev / gap == doctest::Approx(4.0).epsilon(1e-6));
    prev = gap;
  }
  const TargetGrid g1 = TargetGrid::lattice(Geometry::torus(1), 64);
  const ParticleCloud joint =
      init_from_density(g1, Density::general([&](const Vec& x) { return rho(x[0]); }), {}, 0.1);
  CHECK(cdf_gap(joint, a) <= 1.0 / 64);
}

TEST_CASE("init_from_density: errors") {
  const TargetGrid g2 = TargetGrid::lattice(Geometry::torus(2), 4);
  CHECK_THROWS_AS(init_from_density(g2, Density::general([](const Vec&) { return 1.0; }), {}, 0.1),
                  UnsupportedError);
  const TargetGrid g1 = TargetGrid::lattice(Geometry::torus(1), 4);
  CHECK_THROWS_AS(init_from_density(g1, Density::along_axes({[](double) { return 2.0; }, {}, {}}), {}, 0.1),
                  ArgumentError);
  CHECK_THROWS_AS(
      init_from_density(g1, Density::along_axes({[](double x) { return 1.0 + 2.0 * std::sin(2 * kPi * x); }, {}, {}}), {}, 0.1),
      ArgumentError);
}

TEST_CASE("run: stationary cloud stays a fixed point") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(2), 4);
  ParticleCloud c = init_monokinetic(grid, {}, 0.1);
  SimConfig cfg;
  cfg.h = 0.01;
  cfg.t_end = 0.2;
  const Trajectory tr = run(c, grid, cfg);
  CHECK(tr.records.size() == 21);
  for (const auto& r : tr.records) {
    CHECK(r.E_total == 0.0);
    CHECK(r.dist_S == 0.0);
  }
  std::vector<int> id(grid.size());
  std::iota(id.begin(), id.end(), 0);
  CHECK(tr.final_sigma == id);
  CHECK(c.time == doctest::Approx(0.2));
}

TEST_CASE("run: energy monotone, frozen drift, record stride") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(2), 8);
  ParticleCloud c = init_monokinetic(grid, EulerFlow::taylor_green(0.5).initial_velocity(), 0.1);
  SimConfig cfg;
  cfg.h = 0.01;
  cfg.t_end = 0.5;
  cfg.record_every = 7;
  const Trajectory tr = run(c, grid, cfg);
  CHECK(tr.energy_monotone);
  CHECK(tr.max_interval_drift <= 1e-12);
  CHECK(tr.steps == 50);
  CHECK(tr.records.size() == 9);
  CHECK(tr.records.back().t == doctest::Approx(0.5));
  for (std::size_t n = 1; n < tr.reassignment_energies.size(); ++n)
    CHECK(tr.reassignment_energies[n] <= tr.reassignment_energies[n - 1] * (1 + kEnergyRoundoff));
  CHECK(tr.warnings.empty());
}

TEST_CASE("run: argument checks and warnings") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(1), 4);
  ParticleCloud c = init_monokinetic(grid, {}, 0.01);
  SimConfig cfg;
  cfg.h = 0.5;
  cfg.t_end = 0.25;
  CHECK_THROWS_AS(run(c, grid, cfg), ArgumentError);
  cfg.t_end = 1.0;
  const Trajectory tr = run(c, grid, cfg);
  CHECK(tr.warnings.size() == 1);
  const TargetGrid other = TargetGrid::lattice(Geometry::torus(1), 5);
  CHECK_THROWS_AS(run(c, other, cfg), ArgumentError);
}

TEST_CASE("run: solver failure reports the step") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(2), 4);
  ParticleCloud c = init_monokinetic(grid, EulerFlow::taylor_green(0.5).initial_velocity(), 0.1);
  SimConfig cfg;
  cfg.h = 0.01;
  cfg.t_end = 0.1;
  cfg.auction.max_bids = 1;
  try {
    run(c, grid, cfg);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).rfind("step ", 0) == 0);
  }
  cfg.solver = SolverKind::Exact;
  cfg.exact.max_size = 4;
  CHECK_THROWS_AS(run(c, grid, cfg), CapacityError);
}

TEST_CASE("run: relabeling particles relabels the trajectory") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(2), 8);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> s(-0.02, 0.02);
  ParticleCloud c = init_monokinetic(grid, EulerFlow::taylor_green(0.5).initial_velocity(), 0.1);
  for (auto& x : c.positions) x = wrap(c.geometry, {x[0] + s(rng), x[1] + s(rng), 0});
  std::vector<std::size_t> perm(c.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  ParticleCloud p = c;
  for (std::size_t i = 0; i < c.size(); ++i) {
    p.positions[i] = c.positions[perm[i]];
    p.velocities[i] = c.velocities[perm[i]];
  }
  SimConfig cfg;
  cfg.h = 0.01;
  cfg.t_end = 0.3;
  cfg.solver = SolverKind::Exact;
  const Trajectory a = run(c, grid, cfg);
  const Trajectory b = run(p, grid, cfg);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(b.final_sigma[i] == a.final_sigma[perm[i]]);
    for (int k = 0; k < 2; ++k) {
      CHECK(p.positions[i][k] == doctest::Approx(c.positions[perm[i]][k]).epsilon(1e-12));
      CHECK(p.velocities[i][k] == doctest::Approx(c.velocities[perm[i]][k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("run: shear flow particles follow the characteristics") {
  const double eps = 0.05;
  const int m = 32;
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(2), m);
  auto g = [](double y) { return 0.5 * std::sin(2 * kPi * y); };
  const EulerFlow shear = EulerFlow::shear(g);
  ParticleCloud c = init_monokinetic(grid, shear.initial_velocity(), eps);
  const ParticleCloud start = c;
  SimConfig cfg;
  cfg.h = eps / 10;
  cfg.t_end = 0.25;
  run(c, grid, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec x0 = start.positions[i];
    const Vec expected = wrap(c.geometry, {x0[0] + cfg.t_end * g(x0[1]), x0[1], 0});
    worst = std::max(worst, std::sqrt(squared_distance(c.geometry, expected, c.positions[i])));
  }
  MESSAGE("shear characteristic deviation " << worst);
  CHECK(worst <= 2 * eps);
}
