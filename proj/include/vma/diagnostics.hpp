#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vma/particles.hpp"
#include "vma/reference.hpp"
#include "vma/transport.hpp"

namespace vma {

struct EnergyParts {
  double total = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
};

/// E_kin = (1/2N) sum |Xi_i|^2, E_pot = (1/(2 eps^2 N)) sum |X_i - A_sigma(i)|^2.
/// Sums run in increasing particle index.
EnergyParts energy(const ParticleCloud& cloud, const TargetGrid& grid, const Assignment& assignment);

/// Modulated energy against a smooth Euler flow v:
///   (1/2N) sum |Xi_i - v(t, X_i)|^2 + (1/2N) sum |W_i / eps|^2,
/// with W_i the displacement of particle i to its target. With v = 0 this is
/// exactly the total energy.
double modulated_energy_euler(const ParticleCloud& cloud, const TargetGrid& grid,
                              const Assignment& assignment, const EulerFlow& flow);

/// Modulated energy against an Euler-Poisson state:
///   (1/2N) sum |Xi_i - vbar(X_i)|^2 + (1/2N) sum |(X_i - A_sigma(i)) / eps - grad phibar(X_i)|^2.
/// The particle force is -(X - A)/eps^2 and the fluid force -grad phibar / eps,
/// so the field term compares (X - A)/eps with grad phibar. Throws
/// ArgumentError when |ep.time - cloud.time| > time_tolerance.
double modulated_energy_ep(const ParticleCloud& cloud, const TargetGrid& grid,
                           const Assignment& assignment, const EpState& ep,
                           double time_tolerance);

/// Box-counting density with weight |Omega|/N per particle, divided by the
/// bin volume. Particles outside a box domain are counted in the nearest bin.
struct DensityField {
  int dim = 1;
  int bins = 1;
  double bin_volume = 1.0;
  std::vector<double> values;

  double min() const;
  double max() const;
  /// sum of values * bin_volume.
  double mass() const;
};

DensityField density_histogram(const ParticleCloud& cloud, int bins);

/// Least squares line through (log epsilon, log value).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Root of the summed squared residuals in log space.
  double residual = 0.0;
};

SlopeFit fit_slope(std::span<const std::pair<double, double>> pairs);

/// max_i sqrt(|X_i|^2 + eps^2 |Xi_i|^2).
double max_support(const ParticleCloud& cloud);

/// max_i |W_i|.
double max_displacement(const ParticleCloud& cloud, const TargetGrid& grid,
                        const Assignment& assignment);

struct DiagnosticRecord {
  double t = 0.0;
  double E_total = 0.0;
  double E_kinetic = 0.0;
  double E_potential = 0.0;
  double dist_S = 0.0;
  double max_support = 0.0;
  std::optional<double> H_eps;
  std::optional<double> G_eps;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double max_displacement = 0.0;
};

DiagnosticRecord make_record(const ParticleCloud& cloud, const TargetGrid& grid,
                             const Assignment& assignment, int density_bins);

/// Reference solutions compared against the particle cloud at record times.
/// An attached Euler-Poisson state is advanced in lock-step with the cloud.
class ReferenceProbe {
 public:
  ReferenceProbe();
  ~ReferenceProbe();
  ReferenceProbe(ReferenceProbe&&) noexcept;
  ReferenceProbe& operator=(ReferenceProbe&&) noexcept;

  void attach_flow(EulerFlow flow);
  /// `max_dt` further caps the solver's own stability limit.
  void attach_ep(EpState initial, double max_dt);

  const std::optional<EulerFlow>& flow() const noexcept { return flow_; }
  const std::optional<EpState>& ep_state() const noexcept { return ep_; }

  /// Fills H_eps and/or G_eps, advancing the Euler-Poisson state to cloud.time.
  void annotate(DiagnosticRecord& record, const ParticleCloud& cloud, const TargetGrid& grid,
                const Assignment& assignment);

 private:
  std::optional<EulerFlow> flow_;
  std::optional<EpState> ep_;
  std::unique_ptr<EulerPoissonSolver> solver_;
  double ep_max_dt_ = 0.0;
};

/// CSV columns: t,E_total,E_kinetic,E_potential,dist_S,max_support,H_eps,G_eps
void write_record_header(std::ostream& out);
void write_record_row(std::ostream& out, const DiagnosticRecord& record);

/// Shortest round-trip decimal form of x.
std::string format_double(double x);

}  // namespace vma
