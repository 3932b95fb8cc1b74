#include "vma/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "vma/errors.hpp"

namespace vma {

void ParticleCloud::validate() const {
  if (velocities.size() != positions.size())
    throw ArgumentError("positions and velocities sizes differ");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ArgumentError("epsilon must be positive");
  if (!std::isfinite(time)) throw ArgumentError("time must be finite");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (int k = 0; k < kMaxDim; ++k) {
      if (!std::isfinite(positions[i][k]) || !std::isfinite(velocities[i][k]))
        throw ArgumentError("particle " + std::to_string(i) + " is not finite");
    }
    if (geometry.is_torus() && !geometry.contains(positions[i]))
      throw DomainError("particle " + std::to_string(i) + " lies outside [0,1)^d");
  }
}

namespace {

// Five-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                       0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kWeights{0.2369268850561891, 0.4786286704993665,
                                         0.5688888888888889, 0.4786286704993665,
                                         0.2369268850561891};

constexpr int kPanels = 1024;

/// Cumulative distribution of a positive density on [0, length].
class Quantiles {
 public:
  Quantiles(std::function<double(double)> rho, double length)
      : rho_(std::move(rho)), length_(length), edges_(kPanels + 1, 0.0) {
    const double w = length_ / kPanels;
    for (int p = 0; p < kPanels; ++p) edges_[p + 1] = edges_[p] + integral(p * w, (p + 1) * w);
  }

  double total() const { return edges_.back(); }

  /// x with F(x) = u * total, u in (0, 1).
  double inverse(double u) const {
    const double target = u * total();
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), target);
    const int p = std::clamp(static_cast<int>(it - edges_.begin()) - 1, 0, kPanels - 1);
    const double w = length_ / kPanels;
    double lo = p * w;
    double hi = (p + 1) * w;
    const double base = edges_[p];
    for (int iter = 0; iter < 80 && hi - lo > 0.0; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (base + integral(p * w, mid) < target)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  double integral(double a, double b) const {
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t q = 0; q < kNodes.size(); ++q) {
      const double v = rho_(c + r * kNodes[q]);
      if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError("density must be positive and finite");
      s += kWeights[q] * v;
    }
    return r * s;
  }

  std::function<double(double)> rho_;
  double length_;
  std::vector<double> edges_;
};

}  // namespace

ParticleCloud init_monokinetic(const TargetGrid& grid, const VelocityField& v0, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ArgumentError("epsilon must be positive");
  ParticleCloud cloud;
  cloud.geometry = grid.geometry();
  cloud.epsilon = epsilon;
  cloud.positions.assign(grid.points().begin(), grid.points().end());
  cloud.velocities.reserve(grid.size());
  for (const Vec& a : grid.points()) cloud.velocities.push_back(v0 ? v0(a) : Vec{0.0, 0.0, 0.0});
  cloud.validate();
  return cloud;
}

ParticleCloud init_from_density(const TargetGrid& grid, const Density& rho0, const VelocityField& v0,
                                double epsilon) {
  const Geometry& g = grid.geometry();
  const int d = g.dim();
  const int m = grid.edge();

  std::array<std::function<double(double)>, kMaxDim> axis = rho0.factors;
  if (rho0.joint) {
    if (d != 1) throw UnsupportedError("non-separable densities are placed only in one dimension");
    if (axis[0]) throw ArgumentError("density has both a joint form and axis factors");
    axis[0] = [f = rho0.joint](double x) { return f(Vec{x, 0.0, 0.0}); };
  }

  std::array<std::vector<double>, kMaxDim> coords;
  double mass = 1.0;
  for (int k = 0; k < d; ++k) {
    const double length = g.extent()[k];
    auto& c = coords[k];
    c.resize(static_cast<std::size_t>(m));
    if (!axis[k]) {
      for (int j = 0; j < m; ++j) c[j] = (j + 0.5) / m * length;
      mass *= length;
      continue;
    }
    const Quantiles q(axis[k], length);
    mass *= q.total();
    for (int j = 0; j < m; ++j) c[j] = q.inverse((j + 0.5) / m);
  }
  if (std::abs(mass - g.volume()) > 1e-6 * g.volume())
    throw ArgumentError("density integrates to " + format_double(mass) + " instead of " +
                        format_double(g.volume()));

  ParticleCloud cloud;
  cloud.geometry = g;
  cloud.epsilon = epsilon;
  cloud.positions.resize(grid.size());
  cloud.velocities.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::size_t rest = i;
    Vec x{0.0, 0.0, 0.0};
    for (int k = 0; k < d; ++k) {
      x[k] = coords[k][rest % static_cast<std::size_t>(m)];
      rest /= static_cast<std::size_t>(m);
    }
    cloud.positions[i] = wrap(g, x);
    cloud.velocities[i] = v0 ? v0(cloud.positions[i]) : Vec{0.0, 0.0, 0.0};
  }
  cloud.validate();
  return cloud;
}

std::vector<Vec> anchor_offsets(const ParticleCloud& cloud, const TargetGrid& grid,
                                const Assignment& assignment) {
  if (assignment.sigma.size() != cloud.size() || grid.size() != cloud.size())
    throw ArgumentError("cloud, grid and assignment sizes differ");
  std::vector<Vec> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    out[i] = displacement(grid.geometry(), grid[static_cast<std::size_t>(assignment.sigma[i])],
                          cloud.positions[i]);
  return out;
}

void advance_oscillators(ParticleCloud& cloud, std::span<const Vec> offsets, double dt) {
  if (offsets.size() != cloud.size()) throw ArgumentError("one offset per particle is required");
  if (!std::isfinite(dt)) throw ArgumentError("dt must be finite");
  const double eps = cloud.epsilon;
  const double c = std::cos(dt / eps);
  const double s = std::sin(dt / eps);
  const int d = cloud.geometry.dim();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Vec& x = cloud.positions[i];
    Vec& xi = cloud.velocities[i];
    for (int k = 0; k < d; ++k) {
      const double w = offsets[i][k];
      const double w_new = w * c + eps * xi[k] * s;
      xi[k] = -(w / eps) * s + xi[k] * c;
      x[k] += w_new - w;
    }
    x = wrap(cloud.geometry, x);
  }
  cloud.time += dt;
}

Trajectory run(ParticleCloud& cloud, const TargetGrid& grid, const SimConfig& config,
               ReferenceProbe* probe, const RecordCallback& on_record) {
  cloud.validate();
  if (!(cloud.geometry == grid.geometry())) throw ArgumentError("cloud and grid geometries differ");
  if (cloud.size() != grid.size()) throw ArgumentError("cloud and grid sizes differ");
  if (!(config.h > 0.0) || !std::isfinite(config.h)) throw ArgumentError("h must be positive");
  if (!(config.t_end > 0.0) || !std::isfinite(config.t_end))
    throw ArgumentError("t_end must be positive");
  if (config.h > config.t_end * (1.0 + 1e-12)) throw ArgumentError("h must not exceed t_end");
  if (config.record_every < 1) throw ArgumentError("record_every must be at least 1");
  if (config.density_bins < 0) throw ArgumentError("density_bins must not be negative");

  const int bins = config.density_bins > 0 ? config.density_bins : std::max(1, grid.edge() / 4);
  const long long steps = std::max(1LL, std::llround(config.t_end / config.h));
  const double t0 = cloud.time;

  Trajectory tr;
  tr.steps = static_cast<std::size_t>(steps);
  if (config.h > cloud.epsilon / 4.0)
    tr.warnings.push_back("h = " + format_double(config.h) + " exceeds epsilon / 4 = " +
                          format_double(cloud.epsilon / 4.0));

  std::optional<Assignment> current;
  for (long long n = 0; n <= steps; ++n) {
    const CostMatrix cost = cost_matrix(cloud.positions, grid);
    Assignment next;
    try {
      if (config.solver == SolverKind::Exact)
        next = solve_exact(cost, config.exact);
      else
        next = solve_auction(cost, current ? &*current : nullptr, config.auction);
    } catch (const SolverError& e) {
      throw SolverError("step " + std::to_string(n) + ": " + e.what(), e.bids(), e.last_epsilon(),
                        e.unassigned());
    } catch (const CapacityError& e) {
      throw CapacityError("step " + std::to_string(n) + ": " + e.what());
    }
    if (current) {
      const double kept = assignment_cost(cost, current->sigma);
      if (kept <= next.total_cost) {
        next.sigma = current->sigma;
        next.total_cost = kept;
      } else {
        for (std::size_t i = 0; i < next.sigma.size(); ++i)
          tr.reassigned_particles += next.sigma[i] != current->sigma[i] ? 1 : 0;
      }
    }
    current = std::move(next);

    const double e_now = energy(cloud, grid, *current).total;
    if (!tr.reassignment_energies.empty() && 
        e_now > tr.reassignment_energies.back() * (1.0 + kEnergyRoundoff))
      tr.energy_monotone = false;
    tr.reassignment_energies.push_back(e_now);

    if (n % config.record_every == 0 || n == steps) {
      DiagnosticRecord rec = make_record(cloud, grid, *current, bins);
      if (probe) probe->annotate(rec, cloud, grid, *current);
      if (on_record) on_record(rec);
      tr.records.push_back(std::move(rec));
    }
    if (n == steps) break;

    const std::vector<Vec> offsets = anchor_offsets(cloud, grid, *current);
    advance_oscillators(cloud, offsets, config.h);
    cloud.time = t0 + static_cast<double>(n + 1) * config.h;
    const double e_end = energy(cloud, grid, *current).total;
    const double drift = std::abs(e_end - e_now) / std::max(e_now, 1e-300);
    tr.max_interval_drift = std::max(tr.max_interval_drift, drift);
  }
  tr.final_sigma = current->sigma;
  return tr;
}

}  // namespace vma
