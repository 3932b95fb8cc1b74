#include "vma/geometry.hpp"

#include <cmath>
#include <string>

#include "vma/errors.hpp"

namespace vma {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw ArgumentError("dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
}

void check_inside(const Geometry& g, const Vec& p) {
  if (!g.contains(p)) {
    throw DomainError("point outside the domain");
  }
}

// Shift w into (-1/2, 1/2].
inline double fold(double w) noexcept { return w - std::ceil(w - 0.5); }

}  // namespace

Geometry Geometry::torus(int dim) {
  check_dim(dim);
  Vec extent{0.0, 0.0, 0.0};
  for (int k = 0; k < dim; ++k) extent[k] = 1.0;
  return Geometry(GeometryKind::Torus, dim, extent);
}

Geometry Geometry::box(int dim, const Vec& extent) {
  check_dim(dim);
  Vec e{0.0, 0.0, 0.0};
  for (int k = 0; k < dim; ++k) {
    if (!(extent[k] > 0.0) || !std::isfinite(extent[k])) {
      throw ArgumentError("box extent must be positive and finite on every axis");
    }
    e[k] = extent[k];
  }
  return Geometry(GeometryKind::ConvexBox, dim, e);
}

Geometry Geometry::unit_box(int dim) { return box(dim, {1.0, 1.0, 1.0}); }

double Geometry::volume() const noexcept {
  double v = 1.0;
  for (int k = 0; k < dim_; ++k) v *= extent_[k];
  return v;
}

double Geometry::radius() const noexcept {
  double r2 = 0.0;
  for (int k = 0; k < dim_; ++k) r2 += extent_[k] * extent_[k];
  return std::sqrt(r2);
}

bool Geometry::contains(const Vec& p) const noexcept {
  for (int k = 0; k < dim_; ++k) {
    if (!std::isfinite(p[k])) return false;
    if (kind_ == GeometryKind::Torus) {
      if (p[k] < 0.0 || p[k] >= 1.0) return false;
    } else if (p[k] < 0.0 || p[k] > extent_[k]) {
      return false;
    }
  }
  return true;
}

Vec displacement(const Geometry& g, const Vec& from, const Vec& to) noexcept {
  Vec w{0.0, 0.0, 0.0};
  for (int k = 0; k < g.dim(); ++k) {
    w[k] = to[k] - from[k];
    if (g.is_torus()) w[k] = fold(w[k]);
  }
  return w;
}

Vec min_displacement(const Geometry& g, const Vec& from, const Vec& to) {
  check_inside(g, from);
  check_inside(g, to);
  return displacement(g, from, to);
}

Vec wrap(const Geometry& g, const Vec& p) {
  for (int k = 0; k < g.dim(); ++k) {
    if (!std::isfinite(p[k])) throw DomainError("cannot wrap a non-finite coordinate");
  }
  if (!g.is_torus()) return p;
  Vec q{0.0, 0.0, 0.0};
  for (int k = 0; k < g.dim(); ++k) {
    q[k] = p[k] - std::floor(p[k]);
    // tiny negatives round up to exactly 1.0
    if (q[k] >= 1.0) q[k] = 0.0;
  }
  return q;
}

double squared_distance_unchecked(const Geometry& g, const Vec& a, const Vec& b) noexcept {
  double s = 0.0;
  for (int k = 0; k < g.dim(); ++k) {
    double w = b[k] - a[k];
    if (g.is_torus()) w = fold(w);
    s += w * w;
  }
  return s;
}

double squared_distance(const Geometry& g, const Vec& a, const Vec& b) {
  check_inside(g, a);
  check_inside(g, b);
  return squared_distance_unchecked(g, a, b);
}

}  // namespace vma
