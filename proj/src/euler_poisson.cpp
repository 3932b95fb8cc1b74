#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <string>

#include "vma/errors.hpp"
#include "vma/reference.hpp"

namespace vma {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Complex = std::complex<double>;
using Field = std::vector<double>;
using Spectrum = std::vector<Complex>;

// The FFTW planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool all_finite(const Field& f) {
  return std::all_of(f.begin(), f.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

Vec EpState::node(std::size_t index) const noexcept {
  const auto m = static_cast<std::size_t>(resolution);
  Vec x{0.0, 0.0, 0.0};
  x[0] = static_cast<double>(index % m) / resolution;
  if (dim == 2) x[1] = static_cast<double>(index / m) / resolution;
  return x;
}

struct EulerPoissonSolver::Impl {
  int dim;
  int m;
  std::size_t nodes;
  std::size_t half;   // r2c length along axis 0
  std::size_t modes;  // total spectral coefficients
  // Wavenumbers (integers) of each spectral slot along axes 0 and 1.
  std::vector<int> k0, k1;
  std::vector<char> keep;  // 2/3-rule band
  double* real_buf = nullptr;
  fftw_complex* spec_buf = nullptr;
  fftw_plan forward_plan = nullptr;
  fftw_plan inverse_plan = nullptr;

  Impl(int d, int resolution) : dim(d), m(resolution) {
    const auto mm = static_cast<std::size_t>(m);
    nodes = (dim == 1) ? mm : mm * mm;
    half = mm / 2 + 1;
    modes = (dim == 1) ? half : mm * half;
    k0.resize(modes);
    k1.resize(modes);
    keep.resize(modes);
    const int cutoff = m / 3;
    for (std::size_t s = 0; s < modes; ++s) {
      const auto a = static_cast<int>(s % half);
      const auto b = static_cast<int>(s / half);
      k0[s] = a;
      k1[s] = (b <= m / 2) ? b : b - m;
      if (dim == 2 && b == m / 2) k1[s] = -m / 2;
      keep[s] = (std::abs(k0[s]) <= cutoff && std::abs(k1[s]) <= cutoff) ? 1 : 0;
    }
    std::lock_guard lock(planner_mutex());
    real_buf = fftw_alloc_real(nodes);
    spec_buf = fftw_alloc_complex(modes);
    if (dim == 1) {
      forward_plan = fftw_plan_dft_r2c_1d(m, real_buf, spec_buf, FFTW_ESTIMATE);
      inverse_plan = fftw_plan_dft_c2r_1d(m, spec_buf, real_buf, FFTW_ESTIMATE);
    } else {
      // FFTW row-major [i1][i0]: axis 0 is the contiguous, halved one.
      forward_plan = fftw_plan_dft_r2c_2d(m, m, real_buf, spec_buf, FFTW_ESTIMATE);
      inverse_plan = fftw_plan_dft_c2r_2d(m, m, spec_buf, real_buf, FFTW_ESTIMATE);
    }
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_plan);
    fftw_destroy_plan(inverse_plan);
    fftw_free(real_buf);
    fftw_free(spec_buf);
  }

  Spectrum forward(const Field& f) const {
    std::copy(f.begin(), f.end(), real_buf);
    fftw_execute_dft_r2c(forward_plan, real_buf, spec_buf);
    Spectrum out(modes);
    for (std::size_t s = 0; s < modes; ++s) out[s] = {spec_buf[s][0], spec_buf[s][1]};
    return out;
  }

  Field inverse(const Spectrum& spec) const {
    for (std::size_t s = 0; s < modes; ++s) {
      spec_buf[s][0] = spec[s].real();
      spec_buf[s][1] = spec[s].imag();
    }
    fftw_execute_dft_c2r(inverse_plan, spec_buf, real_buf);
    const double scale = 1.0 / static_cast<double>(nodes);
    Field out(nodes);
    for (std::size_t i = 0; i < nodes; ++i) out[i] = real_buf[i] * scale;
    return out;
  }

  int wavenumber(std::size_t s, int axis) const { return axis == 0 ? k0[s] : k1[s]; }

  bool is_nyquist(std::size_t s) const {
    return k0[s] == m / 2 || (dim == 2 && std::abs(k1[s]) == m / 2);
  }

  double k_squared(std::size_t s) const {
    const double a = kTwoPi * k0[s];
    const double b = (dim == 2) ? kTwoPi * k1[s] : 0.0;
    return a * a + b * b;
  }

  Spectrum derivative(const Spectrum& spec, int axis) const {
    Spectrum out(modes);
    for (std::size_t s = 0; s < modes; ++s) {
      if (is_nyquist(s)) continue;
      out[s] = spec[s] * Complex(0.0, kTwoPi * wavenumber(s, axis));
    }
    return out;
  }

  void dealias(Spectrum& spec) const {
    for (std::size_t s = 0; s < modes; ++s) {
      if (!keep[s]) spec[s] = 0.0;
    }
  }

  Spectrum potential(const Spectrum& rho_hat, double epsilon) const {
    Spectrum phi(modes);
    for (std::size_t s = 1; s < modes; ++s) phi[s] = rho_hat[s] / (epsilon * k_squared(s));
    return phi;
  }

  struct Rates {
    Field rho;
    std::array<Field, 2> v;
  };

  Rates rates(const Field& rho, const std::array<Field, 2>& v, double epsilon) const {
    Rates r;
    const Spectrum phi_hat = potential(forward(rho), epsilon);
    std::array<Spectrum, 2> v_hat;
    for (int c = 0; c < dim; ++c) v_hat[c] = forward(v[c]);

    for (int c = 0; c < dim; ++c) {
      Field advection(nodes, 0.0);
      for (int b = 0; b < dim; ++b) {
        const Field dv = inverse(derivative(v_hat[c], b));
        for (std::size_t i = 0; i < nodes; ++i) advection[i] += v[b][i] * dv[i];
      }
      Spectrum adv_hat = forward(advection);
      dealias(adv_hat);
      Spectrum rate_hat(modes);
      const Spectrum dphi = derivative(phi_hat, c);
      for (std::size_t s = 0; s < modes; ++s) rate_hat[s] = -adv_hat[s] - dphi[s] / epsilon;
      r.v[c] = inverse(rate_hat);
    }

    Spectrum div_hat(modes);
    for (int b = 0; b < dim; ++b) {
      Field flux(nodes);
      for (std::size_t i = 0; i < nodes; ++i) flux[i] = rho[i] * v[b][i];
      const Spectrum d = derivative(forward(flux), b);
      for (std::size_t s = 0; s < modes; ++s) div_hat[s] += d[s];
    }
    dealias(div_hat);
    div_hat[0] = 0.0;
    r.rho = inverse(div_hat);
    for (double& x : r.rho) x = -x;
    return r;
  }

  // Trigonometric interpolant of several fields given by their spectra.
  std::vector<std::vector<double>> evaluate(const std::vector<Spectrum>& spectra,
                                            std::span<const Vec> points) const {
    std::vector<std::vector<double>> out(spectra.size(), std::vector<double>(points.size()));
    const auto mm = static_cast<std::size_t>(m);
    std::vector<Complex> phase0(half), phase1(dim == 2 ? mm : 1);
    const double scale = 1.0 / static_cast<double>(nodes);
    for (std::size_t p = 0; p < points.size(); ++p) {
      for (std::size_t a = 0; a < half; ++a) {
        phase0[a] = std::polar(1.0, kTwoPi * static_cast<double>(a) * points[p][0]);
      }
      if (dim == 2) {
        for (std::size_t b = 0; b < mm; ++b) {
          phase1[b] = std::polar(1.0, kTwoPi * static_cast<double>(k1[b * half]) * points[p][1]);
        }
      } else {
        phase1[0] = 1.0;
      }
      for (std::size_t f = 0; f < spectra.size(); ++f) {
        const Spectrum& spec = spectra[f];
        double acc = 0.0;
        for (std::size_t s = 0; s < modes; ++s) {
          const std::size_t a = s % half;
          const double weight = (a == 0 || a == half - 1) ? 1.0 : 2.0;
          const Complex ph = phase0[a] * phase1[s / half];
          acc += weight * (spec[s] * ph).real();
        }
        out[f][p] = acc * scale;
      }
    }
    return out;
  }
};

EulerPoissonSolver::EulerPoissonSolver(int dim, int resolution) {
  if (dim != 1 && dim != 2) throw UnsupportedError("Euler-Poisson solver supports d = 1, 2");
  if (resolution < 4 || resolution > kMaxEpResolution || resolution % 2 != 0) {
    throw ArgumentError("Euler-Poisson resolution must be even and in [4, 256]");
  }
  impl_ = std::make_unique<Impl>(dim, resolution);
}

EulerPoissonSolver::~EulerPoissonSolver() = default;
EulerPoissonSolver::EulerPoissonSolver(EulerPoissonSolver&&) noexcept = default;
EulerPoissonSolver& EulerPoissonSolver::operator=(EulerPoissonSolver&&) noexcept = default;

int EulerPoissonSolver::dim() const noexcept { return impl_->dim; }
int EulerPoissonSolver::resolution() const noexcept { return impl_->m; }

EpState EulerPoissonSolver::make_state(double epsilon, const std::function<double(const Vec&)>& rho0,
                                       const std::function<Vec(const Vec&)>& v0) const {
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  EpState s;
  s.dim = impl_->dim;
  s.resolution = impl_->m;
  s.epsilon = epsilon;
  const std::size_t n = impl_->nodes;
  s.rho.resize(n);
  for (int c = 0; c < s.dim; ++c) s.velocity[c].resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec x = s.node(i);
    s.rho[i] = rho0(x);
    const Vec v = v0(x);
    for (int c = 0; c < s.dim; ++c) s.velocity[c][i] = v[c];
  }
  if (!all_finite(s.rho)) throw ArgumentError("initial density is not finite");

  Spectrum rho_hat = impl_->forward(s.rho);
  impl_->dealias(rho_hat);
  rho_hat[0] = static_cast<double>(n);
  s.rho = impl_->inverse(rho_hat);
  for (int c = 0; c < s.dim; ++c) {
    Spectrum vh = impl_->forward(s.velocity[c]);
    impl_->dealias(vh);
    s.velocity[c] = impl_->inverse(vh);
  }
  solve_poisson(s);
  return s;
}

double EulerPoissonSolver::max_stable_dt(const EpState& state) const {
  double vmax = 0.0;
  for (std::size_t i = 0; i < state.nodes(); ++i) {
    double v2 = 0.0;
    for (int c = 0; c < state.dim; ++c) v2 += state.velocity[c][i] * state.velocity[c][i];
    vmax = std::max(vmax, std::sqrt(v2));
  }
  const double plasma = kTwoPi * state.epsilon / 20.0;
  if (vmax == 0.0) return plasma;
  return std::min(1.0 / (state.resolution * vmax), plasma);
}

void EulerPoissonSolver::solve_poisson(EpState& state) const {
  state.phi = impl_->inverse(impl_->potential(impl_->forward(state.rho), state.epsilon));
}

EpState EulerPoissonSolver::step(const EpState& state, double dt) const {
  if (state.dim != impl_->dim || state.resolution != impl_->m) {
    throw ArgumentError("state does not match the solver grid");
  }
  if (!(dt > 0.0)) throw StepError("Euler-Poisson step needs dt > 0");
  const double limit = max_stable_dt(state);
  if (dt > limit * (1.0 + 1e-12)) {
    throw StepError("dt = " + std::to_string(dt) + " exceeds stability limit " +
                    std::to_string(limit));
  }
  const int d = impl_->dim;
  const std::size_t n = impl_->nodes;
  const double eps = state.epsilon;

  auto shifted = [&](const Impl::Rates& k, double w, Field& rho, std::array<Field, 2>& v) {
    rho = state.rho;
    for (std::size_t i = 0; i < n; ++i) rho[i] += w * k.rho[i];
    for (int c = 0; c < d; ++c) {
      v[c] = state.velocity[c];
      for (std::size_t i = 0; i < n; ++i) v[c][i] += w * k.v[c][i];
    }
  };

  Field rho;
  std::array<Field, 2> v;
  const Impl::Rates k1 = impl_->rates(state.rho, state.velocity, eps);
  shifted(k1, 0.5 * dt, rho, v);
  const Impl::Rates k2 = impl_->rates(rho, v, eps);
  shifted(k2, 0.5 * dt, rho, v);
  const Impl::Rates k3 = impl_->rates(rho, v, eps);
  shifted(k3, dt, rho, v);
  const Impl::Rates k4 = impl_->rates(rho, v, eps);

  EpState next = state;
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    next.rho[i] += w * (k1.rho[i] + 2.0 * k2.rho[i] + 2.0 * k3.rho[i] + k4.rho[i]);
  }
  for (int c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      next.velocity[c][i] += w * (k1.v[c][i] + 2.0 * k2.v[c][i] + 2.0 * k3.v[c][i] + k4.v[c][i]);
    }
  }
  next.time = state.time + dt;
  bool finite = all_finite(next.rho);
  for (int c = 0; c < d; ++c) finite = finite && all_finite(next.velocity[c]);
  if (!finite) {
    throw BlowUpError("Euler-Poisson state became non-finite at t = " + std::to_string(next.time));
  }
  solve_poisson(next);
  return next;
}

double EulerPoissonSolver::poisson_residual(const EpState& state) const {
  Spectrum lap = impl_->forward(state.phi);
  for (std::size_t s = 0; s < impl_->modes; ++s) lap[s] *= -state.epsilon * impl_->k_squared(s);
  const Field eps_lap = impl_->inverse(lap);
  double worst = 0.0;
  for (std::size_t i = 0; i < state.nodes(); ++i) {
    worst = std::max(worst, std::abs(1.0 - eps_lap[i] - state.rho[i]));
  }
  return worst;
}

std::array<std::vector<double>, 2> EulerPoissonSolver::grad_phi(const EpState& state) const {
  std::array<std::vector<double>, 2> g;
  const Spectrum phi_hat = impl_->forward(state.phi);
  for (int c = 0; c < state.dim; ++c) g[c] = impl_->inverse(impl_->derivative(phi_hat, c));
  return g;
}

double EulerPoissonSolver::energy(const EpState& state) const {
  const auto g = grad_phi(state);
  double kinetic = 0.0, field = 0.0;
  for (std::size_t i = 0; i < state.nodes(); ++i) {
    double v2 = 0.0, g2 = 0.0;
    for (int c = 0; c < state.dim; ++c) {
      v2 += state.velocity[c][i] * state.velocity[c][i];
      g2 += g[c][i] * g[c][i];
    }
    kinetic += state.rho[i] * v2;
    field += g2;
  }
  return 0.5 * (kinetic + field) / static_cast<double>(state.nodes());
}

EpFields EulerPoissonSolver::fields_at(const EpState& state, std::span<const Vec> points) const {
  std::vector<Spectrum> spectra;
  for (int c = 0; c < state.dim; ++c) spectra.push_back(impl_->forward(state.velocity[c]));
  const Spectrum phi_hat = impl_->forward(state.phi);
  for (int c = 0; c < state.dim; ++c) spectra.push_back(impl_->derivative(phi_hat, c));
  const auto values = impl_->evaluate(spectra, points);
  EpFields out;
  out.velocity.assign(points.size(), Vec{0.0, 0.0, 0.0});
  out.grad_phi.assign(points.size(), Vec{0.0, 0.0, 0.0});
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (int c = 0; c < state.dim; ++c) {
      out.velocity[p][c] = values[c][p];
      out.grad_phi[p][c] = values[state.dim + c][p];
    }
  }
  return out;
}

std::vector<double> EulerPoissonSolver::interpolate(std::span<const double> nodal,
                                                    std::span<const Vec> points) const {
  if (nodal.size() != impl_->nodes) throw ArgumentError("nodal field has the wrong size");
  const Field f(nodal.begin(), nodal.end());
  return impl_->evaluate({impl_->forward(f)}, points).front();
}

std::complex<double> EulerPoissonSolver::density_mode(const EpState& state, int k) const {
  if (k < 0 || k > impl_->m / 2) throw ArgumentError("density mode out of range");
  const Spectrum rho_hat = impl_->forward(state.rho);
  return rho_hat[static_cast<std::size_t>(k)] / static_cast<double>(impl_->nodes);
}

namespace {

EulerPoissonSolver& cached_solver(int dim, int resolution) {
  thread_local std::map<std::pair<int, int>, EulerPoissonSolver> cache;
  auto it = cache.find({dim, resolution});
  if (it == cache.end()) {
    it = cache.emplace(std::make_pair(dim, resolution), EulerPoissonSolver(dim, resolution)).first;
  }
  return it->second;
}

}  // namespace

EpState ep_step(const EpState& state, double dt) {
  return cached_solver(state.dim, state.resolution).step(state, dt);
}

EpFields ep_fields_at(const EpState& state, std::span<const Vec> points) {
  return cached_solver(state.dim, state.resolution).fields_at(state, points);
}

void write_ep_csv(std::ostream& out, const EpState& state) {
  out << (state.dim == 1 ? "x,rho,v,phi\n" : "x,y,rho,v,v2,phi\n");
  char buf[64];
  auto put = [&](double x) {
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    out << std::string_view(buf, r.ptr - buf);
  };
  for (std::size_t i = 0; i < state.nodes(); ++i) {
    const Vec x = state.node(i);
    for (int c = 0; c < state.dim; ++c) {
      put(x[c]);
      out << ',';
    }
    put(state.rho[i]);
    for (int c = 0; c < state.dim; ++c) {
      out << ',';
      put(state.velocity[c][i]);
    }
    out << ',';
    put(state.phi[i]);
    out << '\n';
  }
}

}  // namespace vma
