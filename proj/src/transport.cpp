#include "vma/transport.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "vma/errors.hpp"

namespace vma {

TargetGrid TargetGrid::lattice(const Geometry& geometry, int edge) {
  if (edge < 1) throw ArgumentError("lattice edge must be at least 1");
  const int d = geometry.dim();
  std::size_t n = 1;
  for (int k = 0; k < d; ++k) n *= static_cast<std::size_t>(edge);
  if (n > kMaxDenseSize) {
    throw ArgumentError("lattice of " + std::to_string(n) + " points exceeds " +
                        std::to_string(kMaxDenseSize));
  }
  std::vector<Vec> points(n, Vec{0.0, 0.0, 0.0});
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t rest = j;
    for (int k = 0; k < d; ++k) {
      const auto idx = static_cast<double>(rest % static_cast<std::size_t>(edge));
      rest /= static_cast<std::size_t>(edge);
      points[j][k] = (idx + 0.5) / edge * geometry.extent()[k];
    }
  }
  return TargetGrid(geometry, edge, std::move(points));
}

CostMatrix::CostMatrix(std::size_t n, std::vector<double> data) : n_(n), data_(std::move(data)) {
  if (data_.size() != n * n) throw ArgumentError("cost matrix data is not n*n");
}

double CostMatrix::max_value() const noexcept {
  double m = 0.0;
  for (double c : data_) m = std::max(m, c);
  return m;
}

CostMatrix cost_matrix(const Geometry& geometry, std::span<const Vec> sources,
                       std::span<const Vec> targets) {
  const std::size_t n = sources.size();
  if (targets.size() != n) {
    throw ArgumentError("cost_matrix: " + std::to_string(n) + " sources but " +
                        std::to_string(targets.size()) + " targets");
  }
  if (n > kMaxDenseSize) throw ArgumentError("cost_matrix: size above dense limit");
  for (const Vec& a : targets) {
    if (!geometry.contains(a)) throw DomainError("cost_matrix: target outside the domain");
  }
  for (const Vec& x : sources) {
    if (geometry.is_torus()) {
      if (!geometry.contains(x)) throw DomainError("cost_matrix: particle outside [0,1)^d");
    } else {
      for (int k = 0; k < geometry.dim(); ++k) {
        if (!std::isfinite(x[k])) throw DomainError("cost_matrix: non-finite particle");
      }
    }
  }
  CostMatrix cost(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost(i, j) = squared_distance_unchecked(geometry, sources[i], targets[j]);
    }
  }
  return cost;
}

CostMatrix cost_matrix(std::span<const Vec> positions, const TargetGrid& grid) {
  return cost_matrix(grid.geometry(), positions, grid.points());
}

bool is_permutation(std::span<const int> sigma) noexcept {
  std::vector<char> seen(sigma.size(), 0);
  for (int s : sigma) {
    if (s < 0 || static_cast<std::size_t>(s) >= sigma.size() || seen[s]) return false;
    seen[s] = 1;
  }
  return true;
}

double assignment_cost(const CostMatrix& cost, std::span<const int> sigma) {
  if (sigma.size() != cost.size()) throw ArgumentError("assignment size differs from cost size");
  double total = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    total += cost(i, static_cast<std::size_t>(sigma[i]));
  }
  return total;
}

namespace {

void check_finite(const CostMatrix& cost) {
  for (double c : cost.values()) {
    if (!std::isfinite(c)) throw ArgumentError("cost matrix has a non-finite entry");
  }
}

void check_consistent(std::span<const Vec> positions, const TargetGrid& grid,
                      const Assignment& assignment) {
  if (positions.size() != grid.size() || assignment.sigma.size() != grid.size()) {
    throw ArgumentError("positions, grid and assignment sizes differ");
  }
  if (!is_permutation(assignment.sigma)) throw ArgumentError("sigma is not a permutation");
}

}  // namespace

Assignment solve_exact(const CostMatrix& cost, const ExactOptions& options) {
  const std::size_t n = cost.size();
  if (n > options.max_size) {
    throw CapacityError("exact solver capped at " + std::to_string(options.max_size) +
                        ", got " + std::to_string(n));
  }
  check_finite(cost);
  Assignment result;
  if (n == 0) return result;

  // 1-based shortest augmenting path with row potentials u and column
  // potentials v; row_of[j] is the row matched to column j (0 = none).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_to(n + 1);
  std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::fill(min_to.begin(), min_to.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < min_to[j]) {
          min_to[j] = reduced;
          way[j] = j0;
        }
        if (min_to[j] < delta) {
          delta = min_to[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          min_to[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.sigma.assign(n, -1);
  result.prices.assign(n, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    result.sigma[row_of[j] - 1] = static_cast<int>(j - 1);
    // cost(i, j) - v[j] is minimised over j at sigma(i)
    result.prices[j - 1] = -v[j];
  }
  result.total_cost = assignment_cost(cost, result.sigma);
  return result;
}

CostMatrix quantize(const CostMatrix& cost, double scale) {
  CostMatrix q(cost.size());
  for (std::size_t i = 0; i < cost.size(); ++i) {
    for (std::size_t j = 0; j < cost.size(); ++j) q(i, j) = std::round(cost(i, j) * scale);
  }
  return q;
}

double distance_to_S(std::span<const Vec> positions, const TargetGrid& grid,
                     const Assignment& assignment) {
  check_consistent(positions, grid, assignment);
  if (positions.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    total += squared_distance_unchecked(grid.geometry(), positions[i],
                                        grid[static_cast<std::size_t>(assignment.sigma[i])]);
  }
  return std::sqrt(total / static_cast<double>(positions.size()));
}

std::vector<Vec> transport_displacements(std::span<const Vec> positions, const TargetGrid& grid,
                                         const Assignment& assignment) {
  check_consistent(positions, grid, assignment);
  std::vector<Vec> w(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    w[i] = displacement(grid.geometry(), positions[i],
                        grid[static_cast<std::size_t>(assignment.sigma[i])]);
  }
  return w;
}

void write_cost_csv(std::ostream& out, const CostMatrix& cost) {
  out << "i,j,cost\n";
  char buf[64];
  for (std::size_t i = 0; i < cost.size(); ++i) {
    for (std::size_t j = 0; j < cost.size(); ++j) {
      auto res = std::to_chars(buf, buf + sizeof buf, cost(i, j));
      out << i << ',' << j << ',' << std::string_view(buf, res.ptr - buf) << '\n';
    }
  }
}

CostMatrix read_cost_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "i,j,cost") {
    throw ArgumentError("cost csv: expected header 'i,j,cost'");
  }
  std::vector<std::size_t> is, js;
  std::vector<double> cs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ArgumentError("cost csv: malformed row at line " + std::to_string(line_no));
    }
    std::size_t i = 0, j = 0;
    double c = 0.0;
    const char* b = line.data();
    auto r1 = std::from_chars(b, b + c1, i);
    auto r2 = std::from_chars(b + c1 + 1, b + c2, j);
    auto r3 = std::from_chars(b + c2 + 1, b + line.size(), c);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r3.ec != std::errc{}) {
      throw ArgumentError("cost csv: bad number at line " + std::to_string(line_no));
    }
    is.push_back(i);
    js.push_back(j);
    cs.push_back(c);
  }
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(cs.size()))));
  if (n * n != cs.size()) throw ArgumentError("cost csv: entry count is not a square");
  CostMatrix cost(n);
  std::vector<char> seen(n * n, 0);
  for (std::size_t k = 0; k < cs.size(); ++k) {
    if (is[k] >= n || js[k] >= n || seen[is[k] * n + js[k]]) {
      throw ArgumentError("cost csv: index out of range or duplicated");
    }
    seen[is[k] * n + js[k]] = 1;
    cost(is[k], js[k]) = cs[k];
  }
  return cost;
}

}  // namespace vma
