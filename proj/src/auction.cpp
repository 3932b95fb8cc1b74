#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "vma/errors.hpp"
#include "vma/transport.hpp"

namespace vma {

namespace {

struct Bid {
  std::size_t object;
  double best;
  double second;
};

// Lowest value of cost(i, j) + price[j], first index on ties, and the
// runner-up value.
Bid best_two(std::span<const double> row, const std::vector<double>& price) {
  const double inf = std::numeric_limits<double>::infinity();
  Bid b{0, inf, inf};
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double value = row[j] + price[j];
    if (value < b.best) {
      b.second = b.best;
      b.best = value;
      b.object = j;
    } else if (value < b.second) {
      b.second = value;
    }
  }
  return b;
}

}  // namespace

Assignment solve_auction(const CostMatrix& cost, const Assignment* warm,
                         const AuctionSchedule& schedule) {
  const std::size_t n = cost.size();
  for (double c : cost.values()) {
    if (!std::isfinite(c)) throw ArgumentError("cost matrix has a non-finite entry");
  }
  if (!(schedule.reduction > 1.0) || !(schedule.initial_fraction > 0.0)) {
    throw ArgumentError("auction schedule needs reduction > 1 and initial_fraction > 0");
  }
  Assignment result;
  if (n == 0) return result;

  const bool warm_sigma = warm != nullptr && warm->sigma.size() == n && is_permutation(warm->sigma);
  const bool warm_prices =
      warm != nullptr && warm->prices.size() == n &&
      std::all_of(warm->prices.begin(), warm->prices.end(), [](double p) { return std::isfinite(p); });

  const double max_cost = cost.max_value();
  if (max_cost == 0.0) {
    result.sigma.resize(n);
    if (warm_sigma) {
      result.sigma = warm->sigma;
    } else {
      std::iota(result.sigma.begin(), result.sigma.end(), 0);
    }
    result.prices.assign(n, 0.0);
    result.total_cost = 0.0;
    return result;
  }

  const double eps_final = schedule.integer_costs
                               ? 1.0 / static_cast<double>(n + 1)
                               : schedule.relative_tolerance * max_cost / static_cast<double>(n + 1);
  const double eps_start = std::max(schedule.initial_fraction * max_cost, eps_final);

  std::vector<double> price(n, 0.0);
  if (warm_prices) price = warm->prices;
  std::vector<long> owner(n, -1), assigned(n, -1);
  double eps = eps_start;
  if (warm_sigma) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(warm->sigma[i]);
      assigned[i] = static_cast<long>(j);
      owner[j] = static_cast<long>(i);
      const Bid b = best_two(cost.row(i), price);
      worst = std::max(worst, cost(i, j) + price[j] - b.best);
    }
    eps = std::clamp(worst, eps_final, eps_start);
  }

  std::size_t bids = 0;
  std::deque<std::size_t> queue;
  for (;;) {
    // Release persons violating eps-complementary slackness.
    for (std::size_t i = 0; i < n; ++i) {
      if (assigned[i] >= 0) {
        const auto j = static_cast<std::size_t>(assigned[i]);
        const Bid b = best_two(cost.row(i), price);
        if (cost(i, j) + price[j] > b.best + eps) {
          owner[j] = -1;
          assigned[i] = -1;
        }
      }
      if (assigned[i] < 0) queue.push_back(i);
    }

    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      const Bid b = best_two(cost.row(i), price);
      const double gap = (n == 1) ? 0.0 : b.second - b.best;
      price[b.object] += gap + eps;
      if (owner[b.object] >= 0) {
        const auto evicted = static_cast<std::size_t>(owner[b.object]);
        assigned[evicted] = -1;
        queue.push_back(evicted);
      }
      owner[b.object] = static_cast<long>(i);
      assigned[i] = static_cast<long>(b.object);
      if (++bids > schedule.max_bids) {
        throw SolverError("auction exceeded its bid cap", bids, eps, queue.size());
      }
    }

    if (eps <= eps_final) break;
    eps = std::max(eps / schedule.reduction, eps_final);
  }

  result.sigma.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.sigma[i] = static_cast<int>(assigned[i]);
  result.prices = std::move(price);
  result.total_cost = assignment_cost(cost, result.sigma);
  return result;
}

}  // namespace vma
