#pragma once

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "vma/geometry.hpp"

namespace vma {

enum class FlowKind { Shear, TaylorGreen, Constant };

/// Analytic steady solution (v, p) of incompressible Euler on the unit torus.
class EulerFlow {
 public:
  /// v = amplitude (sin 2pi x cos 2pi y, -cos 2pi x sin 2pi y),
  /// p = amplitude^2 / 4 (cos 4pi x + cos 4pi y). Two-dimensional.
  static EulerFlow taylor_green(double amplitude);

  /// v = (g(y), 0), p = 0. Two-dimensional; g must be smooth and 1-periodic.
  static EulerFlow shear(std::function<double(double)> profile);

  /// v = velocity everywhere, p = 0. Any dimension.
  static EulerFlow constant(const Vec& velocity);

  FlowKind kind() const noexcept { return kind_; }
  double amplitude() const noexcept { return amplitude_; }

  Vec velocity(double t, const Vec& x) const;
  double pressure(double t, const Vec& x) const;
  Vec pressure_gradient(double t, const Vec& x) const;

  /// The flow at t = 0 as a field for particle initialisation.
  std::function<Vec(const Vec&)> initial_velocity() const;

 private:
  FlowKind kind_ = FlowKind::Constant;
  double amplitude_ = 0.0;
  Vec constant_{0.0, 0.0, 0.0};
  std::function<double(double)> profile_;
};

/// Grid state of the pressureless Euler-Poisson system
///   dv/dt + v.grad v = -(1/eps) grad phi,  drho/dt + div(rho v) = 0,
///   1 - eps lap phi = rho,
/// on an M^d grid of the unit torus (d = 1 or 2). Node index i_0 + M i_1,
/// node coordinates (i_0 / M, i_1 / M).
struct EpState {
  int dim = 1;
  int resolution = 0;
  double epsilon = 1.0;
  double time = 0.0;
  std::vector<double> rho;
  std::vector<double> phi;
  std::array<std::vector<double>, 2> velocity;

  std::size_t nodes() const noexcept { return rho.size(); }
  Vec node(std::size_t index) const noexcept;
};

/// Velocity and potential gradient at arbitrary points.
struct EpFields {
  std::vector<Vec> velocity;
  std::vector<Vec> grad_phi;
};

inline constexpr int kMaxEpResolution = 256;

/// Pseudo-spectral Euler-Poisson integrator: spectral derivatives, 2/3-rule
/// dealiasing of nonlinear terms, classical RK4 in time and a spectral
/// Poisson solve at every stage. Owns FFT plans and scratch buffers, so an
/// instance must not be shared between threads.
class EulerPoissonSolver {
 public:
  EulerPoissonSolver(int dim, int resolution);
  ~EulerPoissonSolver();
  EulerPoissonSolver(const EulerPoissonSolver&) = delete;
  EulerPoissonSolver& operator=(const EulerPoissonSolver&) = delete;
  EulerPoissonSolver(EulerPoissonSolver&&) noexcept;
  EulerPoissonSolver& operator=(EulerPoissonSolver&&) noexcept;

  int dim() const noexcept;
  int resolution() const noexcept;

  /// Samples rho0 and v0 on the grid, removes modes outside the 2/3 band,
  /// pins mean(rho) = 1 and solves for phi.
  EpState make_state(double epsilon, const std::function<double(const Vec&)>& rho0,
                     const std::function<Vec(const Vec&)>& v0) const;

  /// Largest dt accepted by step(): min(dx / max|v|, 2 pi eps / 20).
  double max_stable_dt(const EpState& state) const;

  /// One RK4 step. Throws StepError when dt exceeds max_stable_dt, BlowUpError
  /// when the new state is not finite.
  EpState step(const EpState& state, double dt) const;

  /// Recomputes phi from rho (mean-zero gauge).
  void solve_poisson(EpState& state) const;

  /// max |1 - eps lap phi - rho| over the grid, with spectral derivatives.
  double poisson_residual(const EpState& state) const;

  /// 1/2 int rho |v|^2 + 1/2 int |grad phi|^2.
  double energy(const EpState& state) const;

  /// Spectral gradient of phi at grid nodes, one component per axis.
  std::array<std::vector<double>, 2> grad_phi(const EpState& state) const;

  /// Trigonometric interpolation of v and grad phi at the given points.
  EpFields fields_at(const EpState& state, std::span<const Vec> points) const;

  /// Trigonometric interpolant of an arbitrary nodal field.
  std::vector<double> interpolate(std::span<const double> nodal, std::span<const Vec> points) const;

  /// Complex Fourier coefficient (unnormalised, forward transform / M^d) of
  /// rho - 1 at integer wavenumber k along axis 0.
  std::complex<double> density_mode(const EpState& state, int k) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrappers around a per-thread cached solver.
EpState ep_step(const EpState& state, double dt);
EpFields ep_fields_at(const EpState& state, std::span<const Vec> points);

/// Snapshot dump: header `x[,y],rho,v[,v2],phi`, one row per node.
void write_ep_csv(std::ostream& out, const EpState& state);

}  // namespace vma
