#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "vma/errors.hpp"
#include "vma/reference.hpp"

using namespace vma;

namespace {

constexpr double kPi = std::numbers::pi;

// Fourth-order central difference of f along axis k.
template <typename F>
Vec d4(F f, Vec x, int k, double h) {
  auto at = [&](double s) {
    Vec y = x;
    y[k] += s;
    return f(y);
  };
  const Vec a = at(-2 * h), b = at(-h), c = at(h), d = at(2 * h);
  Vec out{0, 0, 0};
  for (int i = 0; i < 3; ++i) out[i] = (a[i] - 8 * b[i] + 8 * c[i] - d[i]) / (12 * h);
  return out;
}

double max_abs_diff(const EpState& a, const EpState& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.nodes(); ++i) {
    m = std::max(m, std::abs(a.rho[i] - b.rho[i]));
    m = std::max(m, std::abs(a.velocity[0][i] - b.velocity[0][i]));
  }
  return m;
}

EpState advance(const EulerPoissonSolver& s, EpState st, double t_end, int steps) {
  const double dt = t_end / steps;
  for (int n = 0; n < steps; ++n) st = s.step(st, dt);
  return st;
}

}  // namespace

TEST_CASE("Taylor-Green is divergence free and solves steady Euler") {
  const EulerFlow f = EulerFlow::taylor_green(0.5);
  auto v = [&](const Vec& x) { return f.velocity(0.0, x); };
  auto p = [&](const Vec& x) { return Vec{f.pressure(0.0, x), 0, 0}; };
  const double h = 1e-3;
  double div = 0.0, residual = 0.0, grad_err = 0.0;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      const Vec x{(i + 0.37) / 64.0, (j + 0.61) / 64.0, 0};
      const Vec vx = d4(v, x, 0, h), vy = d4(v, x, 1, h);
      div = std::max(div, std::abs(vx[0] + vy[1]));
      const Vec u = v(x);
      const Vec gp{d4(p, x, 0, h)[0], d4(p, x, 1, h)[0], 0};
      for (int c = 0; c < 2; ++c) {
        residual = std::max(residual, std::abs(u[0] * vx[c] + u[1] * vy[c] + gp[c]));
        grad_err = std::max(grad_err, std::abs(gp[c] - f.pressure_gradient(0.0, x)[c]));
      }
    }
  }
  CHECK(div <= 1e-8);
  CHECK(residual <= 1e-8);
  CHECK(grad_err <= 1e-8);
}

TEST_CASE("zero-amplitude Taylor-Green and shear flows") {
  const EulerFlow z = EulerFlow::taylor_green(0.0);
  CHECK(z.velocity(0.3, {0.2, 0.7, 0})[0] == 0.0);
  CHECK(z.pressure(0.3, {0.2, 0.7, 0}) == z.pressure(0.0, {0.9, 0.1, 0}));
  auto g = [](double y) { return std::sin(2 * kPi * y); };
  const EulerFlow s = EulerFlow::shear(g);
  auto v = [&](const Vec& x) { return s.velocity(0.0, x); };
  const Vec x{0.3, 0.2, 0};
  const Vec vx = d4(v, x, 0, 1e-3), vy = d4(v, x, 1, 1e-3);
  CHECK(std::abs(vx[0] + vy[1]) <= 1e-12);
  const Vec u = v(x);
  CHECK(std::abs(u[0] * vx[0] + u[1] * vy[0]) <= 1e-12);
  CHECK(s.pressure(0.0, x) == 0.0);
  CHECK_THROWS_AS(EulerFlow::taylor_green(std::nan("")), ArgumentError);
}

TEST_CASE("Euler-Poisson equilibrium is stationary") {
  const EulerPoissonSolver s(1, 32);
  EpState st = s.make_state(0.1, [](const Vec&) { return 1.0; }, [](const Vec&) { return Vec{0.3, 0, 0}; });
  const EpState start = st;
  st = advance(s, st, 0.5, 100);
  CHECK(max_abs_diff(st, start) <= 1e-13);
  for (double p : st.phi) CHECK(std::abs(p) <= 1e-14);
}

TEST_CASE("Euler-Poisson invariants along a nonlinear run") {
  for (int dim : {1, 2}) {
    const int m = dim == 1 ? 128 : 32;
    const EulerPoissonSolver s(dim, m);
    const double eps = 0.1;
    EpState st = s.make_state(
        eps, [](const Vec& x) { return 1.0 + 0.05 * std::cos(2 * kPi * x[0]) * (1 + 0.5 * std::sin(2 * kPi * x[1])); },
        [](const Vec& x) { return Vec{0.05 * std::sin(2 * kPi * x[1]), 0.02 * std::cos(2 * kPi * x[0]), 0}; });
    const double dt = 0.5 * s.max_stable_dt(st);
    for (int n = 0; n < 50; ++n) {
      st = s.step(st, dt);
      double mean_rho = 0.0, mean_phi = 0.0;
      for (std::size_t i = 0; i < st.nodes(); ++i) {
        mean_rho += st.rho[i];
        mean_phi += st.phi[i];
      }
      CHECK(std::abs(mean_rho / st.nodes() - 1.0) <= 1e-12);
      CHECK(std::abs(mean_phi / st.nodes()) <= 1e-12);
      CHECK(s.poisson_residual(st) <= 1e-10);
    }
  }
}

TEST_CASE("Euler-Poisson step errors") {
  const EulerPoissonSolver s(1, 16);
  EpState st = s.make_state(0.1, [](const Vec&) { return 1.0; }, [](const Vec&) { return Vec{1.0, 0, 0}; });
  CHECK_THROWS_AS(s.step(st, 2.0 * s.max_stable_dt(st)), StepError);
  CHECK_THROWS_AS(s.step(st, 0.0), StepError);
  st.rho[3] = std::nan("");
  CHECK_THROWS_AS(s.step(st, 0.5 * s.max_stable_dt(st)), BlowUpError);
  CHECK_THROWS_AS(EulerPoissonSolver(1, 512), ArgumentError);
  CHECK_THROWS_AS(EulerPoissonSolver(3, 16), UnsupportedError);
}

TEST_CASE("Euler-Poisson RK4 self-convergence") {
  const EulerPoissonSolver s(1, 64);
  const EpState st = s.make_state(
      0.2, [](const Vec& x) { return 1.0 + 0.1 * std::cos(2 * kPi * x[0]); },
      [](const Vec& x) { return Vec{0.1 * std::sin(2 * kPi * x[0]), 0, 0}; });
  const double t = 0.3;
  const EpState ref = advance(s, st, t, 1600);
  const double e1 = max_abs_diff(advance(s, st, t, 50), ref);
  const double e2 = max_abs_diff(advance(s, st, t, 100), ref);
  MESSAGE("RK4 error ratio " << e1 / e2);
  CHECK(e1 / e2 >= 12.0);
  CHECK(e1 / e2 <= 20.0);
}

TEST_CASE("Euler-Poisson energy over one plasma period") {
  const EulerPoissonSolver s(1, 128);
  const double eps = 0.1;
  EpState st = s.make_state(
      eps, [](const Vec& x) { return 1.0 + 0.05 * std::cos(2 * kPi * x[0]); },
      [](const Vec& x) { return Vec{0.02 * std::sin(4 * kPi * x[0]), 0, 0}; });
  const double e0 = s.energy(st);
  const double period = 2 * kPi * eps;
  st = advance(s, st, period, 64);
  CHECK(std::abs(s.energy(st) - e0) <= 1e-6 * e0);
}

TEST_CASE("linear plasma mode oscillates at omega = 1 / eps") {
  // Linearising about (1, 0): d_t rho' = -d_x v, d_t v = -(1/eps) d_x phi,
  // -eps d_xx phi = rho', hence d_tt rho' = -rho' / eps^2.
  for (double eps : {0.2, 0.1}) {
    const EulerPoissonSolver s(1, 64);
    EpState st = s.make_state(
        eps, [](const Vec& x) { return 1.0 + 1e-3 * std::cos(2 * kPi * x[0]); },
        [](const Vec&) { return Vec{0, 0, 0}; });
    const double omega = 1.0 / eps;
    const double dt = 2 * kPi * eps / 400;
    for (int n = 0; n < 200; ++n) {
      st = s.step(st, dt);
      const double expected = 0.5e-3 * std::cos(omega * st.time);
      CHECK(s.density_mode(st, 1).real() == doctest::Approx(expected).epsilon(1e-6).scale(1e-3));
    }
  }
}

TEST_CASE("trigonometric interpolation") {
  const EulerPoissonSolver s(1, 64);
  std::vector<double> nodal(64);
  for (int i = 0; i < 64; ++i) nodal[i] = std::sin(2 * kPi * i / 64.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> pts(1000);
  for (auto& p : pts) p = {u(rng), 0, 0};
  const auto vals = s.interpolate(nodal, pts);
  double err = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) err = std::max(err, std::abs(vals[i] - std::sin(2 * kPi * pts[i][0])));
  CHECK(err <= 1e-6);

  std::vector<Vec> nodes(64);
  for (int i = 0; i < 64; ++i) nodes[i] = {i / 64.0, 0, 0};
  const auto back = s.interpolate(nodal, nodes);
  for (int i = 0; i < 64; ++i) CHECK(std::abs(back[i] - nodal[i]) <= 1e-12);

  const std::vector<double> flat(64, 2.5);
  for (double v : s.interpolate(flat, pts)) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("fields at points match nodal values in two dimensions") {
  const EulerPoissonSolver s(2, 16);
  const EpState st = s.make_state(
      0.2, [](const Vec& x) { return 1.0 + 0.1 * std::cos(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]); },
      [](const Vec& x) { return Vec{std::sin(2 * kPi * x[1]), 0.5, 0}; });
  std::vector<Vec> nodes;
  for (std::size_t i = 0; i < st.nodes(); ++i) nodes.push_back(st.node(i));
  const EpFields f = s.fields_at(st, nodes);
  const auto g = s.grad_phi(st);
  for (std::size_t i = 0; i < st.nodes(); ++i) {
    CHECK(f.velocity[i][0] == doctest::Approx(st.velocity[0][i]).epsilon(1e-12).scale(1.0));
    CHECK(f.velocity[i][1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.grad_phi[i][0] == doctest::Approx(g[0][i]).epsilon(1e-12).scale(1.0));
    CHECK(f.grad_phi[i][1] == doctest::Approx(g[1][i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("snapshot CSV") {
  const EulerPoissonSolver s(1, 4);
  const EpState st = s.make_state(0.1, [](const Vec&) { return 1.0; }, [](const Vec&) { return Vec{0, 0, 0}; });
  std::ostringstream out;
  write_ep_csv(out, st);
  CHECK(out.str().rfind("x,rho,v,phi\n0,1,0,0\n", 0) == 0);
}
