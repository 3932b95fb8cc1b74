#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "vma/geometry.hpp"

namespace vma {

/// Fixed target points A_j: the cell centres of an m^d lattice on the domain.
/// Index j = j_0 + m j_1 + m^2 j_2 (axis 0 fastest).
class TargetGrid {
 public:
  static TargetGrid lattice(const Geometry& geometry, int edge);

  const Geometry& geometry() const noexcept { return geometry_; }
  int edge() const noexcept { return edge_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::span<const Vec> points() const noexcept { return points_; }
  const Vec& operator[](std::size_t j) const noexcept { return points_[j]; }

  /// Lattice spacing along axis k.
  double spacing(int axis) const noexcept { return geometry_.extent()[axis] / edge_; }

 private:
  TargetGrid(Geometry geometry, int edge, std::vector<Vec> points)
      : geometry_(geometry), edge_(edge), points_(std::move(points)) {}

  Geometry geometry_;
  int edge_;
  std::vector<Vec> points_;
};

inline constexpr std::size_t kMaxDenseSize = 4096;

/// Dense row-major n x n matrix of assignment costs.
class CostMatrix {
 public:
  CostMatrix() = default;
  explicit CostMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
  CostMatrix(std::size_t n, std::vector<double> data);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * n_, n_}; }
  std::span<const double> values() const noexcept { return data_; }

  double max_value() const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Entry (i, j) = squared_distance(X_i, A_j). Throws ArgumentError on size
/// mismatch or above kMaxDenseSize, DomainError on points outside the domain.
/// Box mode accepts particles outside the box (their motion is unconstrained).
CostMatrix cost_matrix(std::span<const Vec> positions, const TargetGrid& grid);

/// General form over two arbitrary point sets of equal size.
CostMatrix cost_matrix(const Geometry& geometry, std::span<const Vec> sources,
                       std::span<const Vec> targets);

/// Permutation sigma (particle i -> target sigma[i]) with its cost.
struct Assignment {
  std::vector<int> sigma;
  /// sum_i cost(i, sigma[i]), summed in increasing i.
  double total_cost = 0.0;
  /// Per-target dual values in units of cost: particle i prefers the target
  /// minimising cost(i, j) + prices[j].
  std::vector<double> prices;
};

bool is_permutation(std::span<const int> sigma) noexcept;

/// Fixed-order sum of cost(i, sigma[i]).
double assignment_cost(const CostMatrix& cost, std::span<const int> sigma);

struct ExactOptions {
  std::size_t max_size = 512;
};

/// Globally optimal assignment by shortest augmenting paths with dual
/// potentials, O(n^3).
///
/// Scan order: rows are inserted in increasing index; each augmentation scans
/// free columns in increasing index and keeps the first column reaching the
/// minimal reduced distance. The result is fully deterministic.
Assignment solve_exact(const CostMatrix& cost, const ExactOptions& options = {});

/// Parameters of auction epsilon-scaling.
struct AuctionSchedule {
  /// First phase runs at initial_fraction * max cost.
  double initial_fraction = 0.25;
  /// Epsilon is divided by this factor between phases.
  double reduction = 4.0;
  /// Final epsilon = relative_tolerance * max cost / (n + 1).
  double relative_tolerance = 1e-9;
  /// Costs are integers: final epsilon = 1 / (n + 1), which makes the result
  /// exactly optimal.
  bool integer_costs = false;
  /// Upper bound on the total number of bids before giving up.
  std::size_t max_bids = 500'000'000;
};

/// Gauss-Seidel forward auction with epsilon-scaling. The returned total cost
/// is within n * epsilon_final of the optimum.
///
/// A warm start seeds prices and the partial assignment; persons violating
/// epsilon-complementary slackness are released at each phase, so a good warm
/// start only reduces work. Throws SolverError when max_bids is exceeded.
Assignment solve_auction(const CostMatrix& cost, const Assignment* warm = nullptr,
                         const AuctionSchedule& schedule = {});

/// Copy of `cost` with entries rounded to integers after multiplying by scale.
CostMatrix quantize(const CostMatrix& cost, double scale);

/// d(X, S) = sqrt((1/N) sum_i |X_i - A_sigma(i)|^2).
double distance_to_S(std::span<const Vec> positions, const TargetGrid& grid,
                     const Assignment& assignment);

/// W_i = A_sigma(i) - X_i (minimal image on the torus).
std::vector<Vec> transport_displacements(std::span<const Vec> positions, const TargetGrid& grid,
                                         const Assignment& assignment);

/// Debug dump: header `i,j,cost`, one row per entry, row-major.
void write_cost_csv(std::ostream& out, const CostMatrix& cost);
CostMatrix read_cost_csv(std::istream& in);

}  // namespace vma
