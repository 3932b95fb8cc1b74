#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "vma/errors.hpp"
#include "vma/transport.hpp"

using namespace vma;

namespace {

double brute_force_optimum(const CostMatrix& c) {
  std::vector<int> p(c.size());
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += c(i, static_cast<std::size_t>(p[i]));
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

std::vector<Vec> random_points(std::mt19937_64& rng, std::size_t n, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> pts(n, Vec{0, 0, 0});
  for (auto& p : pts)
    for (int k = 0; k < d; ++k) p[k] = u(rng);
  return pts;
}

}  // namespace

TEST_CASE("lattice ordering and spacing") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(2), 4);
  REQUIRE(grid.size() == 16);
  CHECK(grid[0][0] == doctest::Approx(0.125));
  CHECK(grid[1][0] == doctest::Approx(0.375));
  CHECK(grid[4][1] == doctest::Approx(0.375));
  CHECK(grid.spacing(0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(TargetGrid::lattice(Geometry::torus(2), 65), ArgumentError);
  const TargetGrid box = TargetGrid::lattice(Geometry::box(1, {2.0, 0, 0}), 4);
  CHECK(box[3][0] == doctest::Approx(1.75));
}

TEST_CASE("cost matrix of a hand-computed two-point example") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::unit_box(1), 2);
  const std::vector<Vec> x{{0.1, 0, 0}, {0.6, 0, 0}};
  const CostMatrix c = cost_matrix(x, grid);
  CHECK(c(0, 0) == doctest::Approx(0.0225));
  CHECK(c(0, 1) == doctest::Approx(0.4225));
  CHECK(c(1, 0) == doctest::Approx(0.1225));
  CHECK(c(1, 1) == doctest::Approx(0.0225));
  const Assignment a = solve_exact(c);
  CHECK(a.sigma == std::vector<int>{0, 1});
  CHECK(a.total_cost == doctest::Approx(0.045));
}

TEST_CASE("cost matrix argument checks") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(1), 2);
  CHECK_THROWS_AS(cost_matrix(std::vector<Vec>{{0.1, 0, 0}}, grid), ArgumentError);
  CHECK_THROWS_AS(cost_matrix(std::vector<Vec>{{0.1, 0, 0}, {1.2, 0, 0}}, grid), DomainError);
  const TargetGrid box = TargetGrid::lattice(Geometry::unit_box(1), 2);
  CHECK_NOTHROW(cost_matrix(std::vector<Vec>{{0.1, 0, 0}, {1.2, 0, 0}}, box));
}

TEST_CASE("both solvers match brute force on small instances") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 7);
    const int d = 1 + t % 3;
    const Geometry g = Geometry::torus(d);
    const CostMatrix c = cost_matrix(g, random_points(rng, n, d), random_points(rng, n, d));
    const double best = brute_force_optimum(c);
    const Assignment e = solve_exact(c);
    const Assignment a = solve_auction(c);
    CHECK(is_permutation(e.sigma));
    CHECK(is_permutation(a.sigma));
    CHECK(e.total_cost == doctest::Approx(best).epsilon(1e-12));
    CHECK(a.total_cost == doctest::Approx(best).epsilon(1e-12));
    CHECK(e.total_cost == assignment_cost(c, e.sigma));
  }
}

TEST_CASE("integer costs give exact optima") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 5 + static_cast<std::size_t>(t % 4);
    const CostMatrix q = quantize(cost_matrix(Geometry::torus(2), random_points(rng, n, 2),
                                              random_points(rng, n, 2)), 1e6);
    for (double v : q.values()) CHECK(v == std::round(v));
    const double best = brute_force_optimum(q);
    AuctionSchedule s;
    s.integer_costs = true;
    CHECK(solve_exact(q).total_cost == best);
    CHECK(solve_auction(q, nullptr, s).total_cost == best);
  }
}

TEST_CASE("ties resolve deterministically") {
  const CostMatrix zero(4);
  CHECK(solve_exact(zero).sigma == std::vector<int>{0, 1, 2, 3});
  CHECK(solve_auction(zero).sigma == std::vector<int>{0, 1, 2, 3});
  const CostMatrix c(3, {1, 1, 1, 1, 1, 1, 1, 1, 1});
  CHECK(solve_exact(c).sigma == solve_exact(c).sigma);
  CHECK(solve_auction(c).sigma == solve_auction(c).sigma);
}

TEST_CASE("warm started auction agrees with the exact solver") {
  std::mt19937_64 rng(3);
  const std::size_t n = 100;
  auto x = random_points(rng, n, 2);
  const auto targets = random_points(rng, n, 2);
  const Geometry g = Geometry::torus(2);
  const Assignment first = solve_auction(cost_matrix(g, x, targets));
  std::normal_distribution<double> jitter(0.0, 0.003);
  for (auto& p : x) p = wrap(g, {p[0] + jitter(rng), p[1] + jitter(rng), 0});
  const CostMatrix c = cost_matrix(g, x, targets);
  const Assignment warm = solve_auction(c, &first);
  CHECK(warm.total_cost == doctest::Approx(solve_exact(c).total_cost).epsilon(1e-9));
}

TEST_CASE("solver limits and input validation") {
  const CostMatrix c(3, {1, 2, 3, 2, 4, 6, 3, 6, 9});
  ExactOptions cap;
  cap.max_size = 2;
  CHECK_THROWS_AS(solve_exact(c, cap), CapacityError);
  AuctionSchedule s;
  s.max_bids = 1;
  try {
    solve_auction(c, nullptr, s);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.bids() > 1);
    CHECK(e.last_epsilon() > 0.0);
  }
  const CostMatrix bad(2, {0, std::nan(""), 0, 0});
  CHECK_THROWS_AS(solve_exact(bad), ArgumentError);
  CHECK_THROWS_AS(solve_auction(bad), ArgumentError);
}

TEST_CASE("distance to the permutation set") {
  const TargetGrid grid = TargetGrid::lattice(Geometry::torus(1), 10);
  std::vector<Vec> x;
  for (const Vec& a : grid.points()) x.push_back(wrap(grid.geometry(), {a[0] + 0.1, 0, 0}));
  Assignment a;
  a.sigma.resize(10);
  std::iota(a.sigma.begin(), a.sigma.end(), 0);
  CHECK(distance_to_S(x, grid, a) == doctest::Approx(0.1).epsilon(1e-12));
  const auto w = transport_displacements(x, grid, a);
  for (const Vec& v : w) CHECK(v[0] == doctest::Approx(-0.1));
  // The optimal assignment shifts every target by one cell.
  const Assignment best = solve_exact(cost_matrix(x, grid));
  CHECK(distance_to_S(x, grid, best) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cost CSV round trip") {
  std::mt19937_64 rng(1);
  const CostMatrix c = cost_matrix(Geometry::torus(2), random_points(rng, 5, 2), random_points(rng, 5, 2));
  std::stringstream ss;
  write_cost_csv(ss, c);
  const CostMatrix back = read_cost_csv(ss);
  REQUIRE(back.size() == 5);
  for (std::size_t i = 0; i < 25; ++i) CHECK(back.values()[i] == c.values()[i]);
  std::stringstream bad("i,j,cost\n0,0,x\n");
  CHECK_THROWS_AS(read_cost_csv(bad), ArgumentError);
}
