#include <cmath>
#include <numbers>

#include "vma/errors.hpp"
#include "vma/reference.hpp"

namespace vma {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

EulerFlow EulerFlow::taylor_green(double amplitude) {
  if (!std::isfinite(amplitude)) throw ArgumentError("Taylor-Green amplitude must be finite");
  EulerFlow f;
  f.kind_ = FlowKind::TaylorGreen;
  f.amplitude_ = amplitude;
  return f;
}

EulerFlow EulerFlow::shear(std::function<double(double)> profile) {
  if (!profile) throw ArgumentError("shear flow needs a profile");
  EulerFlow f;
  f.kind_ = FlowKind::Shear;
  f.profile_ = std::move(profile);
  return f;
}

EulerFlow EulerFlow::constant(const Vec& velocity) {
  EulerFlow f;
  f.kind_ = FlowKind::Constant;
  f.constant_ = velocity;
  f.amplitude_ = std::sqrt(norm_squared(velocity));
  return f;
}

Vec EulerFlow::velocity(double /*t*/, const Vec& x) const {
  switch (kind_) {
    case FlowKind::TaylorGreen: {
      const double sx = std::sin(kTwoPi * x[0]), cx = std::cos(kTwoPi * x[0]);
      const double sy = std::sin(kTwoPi * x[1]), cy = std::cos(kTwoPi * x[1]);
      return {amplitude_ * sx * cy, -amplitude_ * cx * sy, 0.0};
    }
    case FlowKind::Shear:
      return {profile_(x[1]), 0.0, 0.0};
    case FlowKind::Constant:
      return constant_;
  }
  return {0.0, 0.0, 0.0};
}

double EulerFlow::pressure(double /*t*/, const Vec& x) const {
  if (kind_ != FlowKind::TaylorGreen) return 0.0;
  const double a2 = amplitude_ * amplitude_;
  return 0.25 * a2 * (std::cos(2.0 * kTwoPi * x[0]) + std::cos(2.0 * kTwoPi * x[1]));
}

Vec EulerFlow::pressure_gradient(double /*t*/, const Vec& x) const {
  if (kind_ != FlowKind::TaylorGreen) return {0.0, 0.0, 0.0};
  const double c = -0.25 * amplitude_ * amplitude_ * 2.0 * kTwoPi;
  return {c * std::sin(2.0 * kTwoPi * x[0]), c * std::sin(2.0 * kTwoPi * x[1]), 0.0};
}

std::function<Vec(const Vec&)> EulerFlow::initial_velocity() const {
  return [flow = *this](const Vec& x) { return flow.velocity(0.0, x); };
}

}  // namespace vma
