#include "vma/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "vma/errors.hpp"

namespace vma {

namespace {

void check_sizes(const ParticleCloud& cloud, const TargetGrid& grid, const Assignment& assignment) {
  if (cloud.size() != grid.size() || assignment.sigma.size() != grid.size())
    throw ArgumentError("cloud, grid and assignment sizes differ");
  if (cloud.velocities.size() != cloud.size())
    throw ArgumentError("positions and velocities sizes differ");
  if (!(cloud.epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
}

}  // namespace

EnergyParts energy(const ParticleCloud& cloud, const TargetGrid& grid, const Assignment& assignment) {
  check_sizes(cloud, grid, assignment);
  const std::size_t n = cloud.size();
  const Geometry& g = grid.geometry();
  double kin = 0.0;
  double pot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    kin += norm_squared(cloud.velocities[i]);
    pot += squared_distance_unchecked(g, cloud.positions[i],
                                      grid[static_cast<std::size_t>(assignment.sigma[i])]);
  }
  EnergyParts e;
  e.kinetic = kin / (2.0 * static_cast<double>(n));
  e.potential = pot / (2.0 * cloud.epsilon * cloud.epsilon * static_cast<double>(n));
  e.total = e.kinetic + e.potential;
  return e;
}

double modulated_energy_euler(const ParticleCloud& cloud, const TargetGrid& grid,
                              const Assignment& assignment, const EulerFlow& flow) {
  check_sizes(cloud, grid, assignment);
  const std::size_t n = cloud.size();
  const Geometry& g = grid.geometry();
  const double eps = cloud.epsilon;
  double kin = 0.0;
  double field = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    kin += norm_squared(cloud.velocities[i] - flow.velocity(cloud.time, cloud.positions[i]));
    field += squared_distance_unchecked(g, cloud.positions[i],
                                        grid[static_cast<std::size_t>(assignment.sigma[i])]);
  }
  return kin / (2.0 * static_cast<double>(n)) +
         field / (2.0 * eps * eps * static_cast<double>(n));
}

double modulated_energy_ep(const ParticleCloud& cloud, const TargetGrid& grid,
                           const Assignment& assignment, const EpState& ep, double time_tolerance) {
  check_sizes(cloud, grid, assignment);
  if (!grid.geometry().is_torus()) throw ArgumentError("Euler-Poisson comparison needs the torus");
  if (ep.dim != grid.geometry().dim()) throw ArgumentError("Euler-Poisson state dimension differs");
  if (std::abs(ep.time - cloud.time) > time_tolerance)
    throw ArgumentError("Euler-Poisson state time " + format_double(ep.time) +
                        " does not match particle time " + format_double(cloud.time));
  const std::size_t n = cloud.size();
  const Geometry& g = grid.geometry();
  const double eps = cloud.epsilon;
  const EpFields fields = ep_fields_at(ep, cloud.positions);
  double kin = 0.0;
  double field = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    kin += norm_squared(cloud.velocities[i] - fields.velocity[i]);
    const Vec offset = displacement(g, grid[static_cast<std::size_t>(assignment.sigma[i])],
                                    cloud.positions[i]);
    field += norm_squared((1.0 / eps) * offset - fields.grad_phi[i]);
  }
  return (kin + field) / (2.0 * static_cast<double>(n));
}

double DensityField::min() const { return *std::min_element(values.begin(), values.end()); }
double DensityField::max() const { return *std::max_element(values.begin(), values.end()); }

double DensityField::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * bin_volume;
}

DensityField density_histogram(const ParticleCloud& cloud, int bins) {
  if (bins < 1) throw ArgumentError("density_histogram needs at least one bin");
  if (cloud.size() == 0) throw ArgumentError("density_histogram of an empty cloud");
  const Geometry& g = cloud.geometry;
  const int d = g.dim();
  std::size_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= static_cast<std::size_t>(bins);
  if (cells > (std::size_t{1} << 24)) throw ArgumentError("density_histogram: too many bins");

  DensityField out;
  out.dim = d;
  out.bins = bins;
  out.bin_volume = g.volume() / static_cast<double>(cells);
  out.values.assign(cells, 0.0);

  const double weight = g.volume() / static_cast<double>(cloud.size());
  for (const Vec& x : cloud.positions) {
    std::size_t index = 0;
    std::size_t stride = 1;
    for (int k = 0; k < d; ++k) {
      const double u = x[static_cast<std::size_t>(k)] / g.extent()[static_cast<std::size_t>(k)];
      long b = static_cast<long>(std::floor(u * bins));
      b = std::clamp(b, 0L, static_cast<long>(bins - 1));
      index += static_cast<std::size_t>(b) * stride;
      stride *= static_cast<std::size_t>(bins);
    }
    out.values[index] += weight;
  }
  for (double& v : out.values) v /= out.bin_volume;
  return out;
}

SlopeFit fit_slope(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 3) throw ArgumentError("fit_slope needs at least three points");
  double sx = 0.0, sy = 0.0;
  std::vector<std::pair<double, double>> logs;
  logs.reserve(pairs.size());
  for (const auto& [e, v] : pairs) {
    if (!(e > 0.0) || !(v > 0.0) || !std::isfinite(e) || !std::isfinite(v))
      throw ArgumentError("fit_slope needs positive finite values");
    logs.emplace_back(std::log(e), std::log(v));
    sx += logs.back().first;
    sy += logs.back().second;
  }
  const double m = static_cast<double>(logs.size());
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
  }
  if (sxx == 0.0) throw ArgumentError("fit_slope needs distinct epsilons");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& [lx, ly] : logs) {
    const double r = ly - (fit.intercept + fit.slope * lx);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss);
  return fit;
}

double max_support(const ParticleCloud& cloud) {
  const double e2 = cloud.epsilon * cloud.epsilon;
  double best = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    best = std::max(best, norm_squared(cloud.positions[i]) + e2 * norm_squared(cloud.velocities[i]));
  return std::sqrt(best);
}

double max_displacement(const ParticleCloud& cloud, const TargetGrid& grid,
                        const Assignment& assignment) {
  check_sizes(cloud, grid, assignment);
  double best = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    best = std::max(best, squared_distance_unchecked(grid.geometry(), cloud.positions[i],
                                                     grid[static_cast<std::size_t>(assignment.sigma[i])]));
  return std::sqrt(best);
}

DiagnosticRecord make_record(const ParticleCloud& cloud, const TargetGrid& grid,
                             const Assignment& assignment, int density_bins) {
  const EnergyParts e = energy(cloud, grid, assignment);
  DiagnosticRecord r;
  r.t = cloud.time;
  r.E_total = e.total;
  r.E_kinetic = e.kinetic;
  r.E_potential = e.potential;
  r.dist_S = distance_to_S(cloud.positions, grid, assignment);
  r.max_support = max_support(cloud);
  r.max_displacement = max_displacement(cloud, grid, assignment);
  const DensityField rho = density_histogram(cloud, density_bins);
  r.rho_min = rho.min();
  r.rho_max = rho.max();
  return r;
}

ReferenceProbe::ReferenceProbe() = default;
ReferenceProbe::~ReferenceProbe() = default;
ReferenceProbe::ReferenceProbe(ReferenceProbe&&) noexcept = default;
ReferenceProbe& ReferenceProbe::operator=(ReferenceProbe&&) noexcept = default;

void ReferenceProbe::attach_flow(EulerFlow flow) { flow_ = std::move(flow); }

void ReferenceProbe::attach_ep(EpState initial, double max_dt) {
  if (!(max_dt > 0.0)) throw ArgumentError("Euler-Poisson max_dt must be positive");
  solver_ = std::make_unique<EulerPoissonSolver>(initial.dim, initial.resolution);
  ep_ = std::move(initial);
  ep_max_dt_ = max_dt;
}

void ReferenceProbe::annotate(DiagnosticRecord& record, const ParticleCloud& cloud,
                              const TargetGrid& grid, const Assignment& assignment) {
  if (flow_) record.H_eps = modulated_energy_euler(cloud, grid, assignment, *flow_);
  if (!ep_) return;
  const double target = cloud.time;
  if (target < ep_->time) throw ArgumentError("Euler-Poisson state is ahead of the particles");
  const double tol = 1e-14 * std::max(1.0, target);
  while (target - ep_->time > tol) {
    const double left = target - ep_->time;
    const double limit = std::min(ep_max_dt_, solver_->max_stable_dt(*ep_));
    *ep_ = solver_->step(*ep_, left / std::ceil(left / limit));
  }
  ep_->time = target;
  record.G_eps = modulated_energy_ep(cloud, grid, assignment, *ep_, 1e-12 * std::max(1.0, target));
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_record_header(std::ostream& out) {
  out << "t,E_total,E_kinetic,E_potential,dist_S,max_support,H_eps,G_eps\n";
}

void write_record_row(std::ostream& out, const DiagnosticRecord& r) {
  out << format_double(r.t) << ',' << format_double(r.E_total) << ',' << format_double(r.E_kinetic)
      << ',' << format_double(r.E_potential) << ',' << format_double(r.dist_S) << ','
      << format_double(r.max_support) << ',' << (r.H_eps ? format_double(*r.H_eps) : "") << ','
      << (r.G_eps ? format_double(*r.G_eps) : "") << '\n';
}

}  // namespace vma
