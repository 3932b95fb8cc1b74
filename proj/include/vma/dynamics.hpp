#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vma/diagnostics.hpp"
#include "vma/particles.hpp"
#include "vma/transport.hpp"

namespace vma {

/// Cloud sitting on the grid (X_i = A_i) with velocities Xi_i = v0(A_i).
ParticleCloud init_monokinetic(const TargetGrid& grid, const VelocityField& v0, double epsilon);

/// Initial density for quantile placement. In one dimension either form may
/// be given; in two and three dimensions only separable products are placed.
struct Density {
  /// rho(x) = prod_k factors[k](x_k); an empty factor means 1.
  std::array<std::function<double(double)>, kMaxDim> factors;
  /// General density; only usable in one dimension.
  std::function<double(const Vec&)> joint;

  static Density uniform() { return {}; }
  static Density along_axes(std::array<std::function<double(double)>, kMaxDim> f) {
    Density d;
    d.factors = std::move(f);
    return d;
  }
  static Density general(std::function<double(const Vec&)> rho) {
    Density d;
    d.joint = std::move(rho);
    return d;
  }
};

/// Places particle i at the per-axis quantiles ((j_k + 1/2) / m) of rho0, where
/// j is the lattice index of target i, and sets Xi_i = v0(X_i).
/// Throws UnsupportedError for a non-separable density when d >= 2, and
/// ArgumentError when rho0 is not positive or does not integrate to |Omega|.
ParticleCloud init_from_density(const TargetGrid& grid, const Density& rho0, const VelocityField& v0,
                                double epsilon);

/// Offsets X_i - A_sigma(i) (minimal image on the torus).
std::vector<Vec> anchor_offsets(const ParticleCloud& cloud, const TargetGrid& grid,
                                const Assignment& assignment);

/// Exact flow of eps^2 W'' + W = 0 for each particle's offset W from a frozen
/// anchor:
///   W  <- W cos(dt/eps) + eps Xi sin(dt/eps)
///   Xi <- -(W/eps) sin(dt/eps) + Xi cos(dt/eps)
/// Positions move by the change in W and are wrapped on the torus. Negative dt
/// integrates backwards.
void advance_oscillators(ParticleCloud& cloud, std::span<const Vec> offsets, double dt);

inline ParticleCloud oscillator_step(ParticleCloud cloud, std::span<const Vec> offsets, double dt) {
  advance_oscillators(cloud, offsets, dt);
  return cloud;
}

enum class SolverKind { Exact, Auction };

struct SimConfig {
  double h = 0.01;
  double t_end = 1.0;
  SolverKind solver = SolverKind::Auction;
  std::uint64_t seed = 0;
  int record_every = 1;
  /// Histogram bins per axis for rho_min / rho_max; 0 picks max(1, edge / 4).
  int density_bins = 0;
  ExactOptions exact;
  AuctionSchedule auction;
};

struct Trajectory {
  std::vector<DiagnosticRecord> records;
  /// Optimal-sigma total energy right after every reassignment.
  std::vector<double> reassignment_energies;
  /// Largest relative change of frozen-sigma energy across one interval.
  double max_interval_drift = 0.0;
  /// reassignment_energies non-increasing up to kEnergyRoundoff relative.
  bool energy_monotone = true;
  std::size_t steps = 0;
  /// Number of particles whose target changed, summed over reassignments.
  std::size_t reassigned_particles = 0;
  std::vector<int> final_sigma;
  std::vector<std::string> warnings;
};

/// Relative slack allowed when comparing energies that agree in exact arithmetic.
inline constexpr double kEnergyRoundoff = 1e-12;

using RecordCallback = std::function<void(const DiagnosticRecord&)>;

/// Reassign-then-oscillate loop: at t = n h the optimal sigma is recomputed
/// (warm-started from the previous one, which is kept when it is no worse),
/// then every particle follows its exact oscillator orbit for time h.
/// Records are taken right after reassignment at every `record_every`-th
/// step and at the final step. Solver errors are rethrown with the step index.
Trajectory run(ParticleCloud& cloud, const TargetGrid& grid, const SimConfig& config,
               ReferenceProbe* probe = nullptr, const RecordCallback& on_record = {});

}  // namespace vma
