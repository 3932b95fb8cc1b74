#pragma once

#include <array>
#include <cstddef>

namespace vma {

inline constexpr int kMaxDim = 3;

/// Point or vector in up to three dimensions. Components at index >= dim are
/// kept at zero so that norms can be taken over the full array.
using Vec = std::array<double, kMaxDim>;

enum class GeometryKind { ConvexBox, Torus };

/// Spatial setting: the axis-aligned box [0, L_1] x ... x [0, L_d], or the
/// flat torus R^d / Z^d represented on the fundamental domain [0, 1)^d.
class Geometry {
 public:
  static Geometry torus(int dim);
  static Geometry box(int dim, const Vec& extent);
  static Geometry unit_box(int dim);

  GeometryKind kind() const noexcept { return kind_; }
  bool is_torus() const noexcept { return kind_ == GeometryKind::Torus; }
  int dim() const noexcept { return dim_; }
  const Vec& extent() const noexcept { return extent_; }

  /// Lebesgue measure of the domain (1 for the torus).
  double volume() const noexcept;

  /// sup over the closed domain of |y|, measured from the origin.
  double radius() const noexcept;

  /// Torus: every coordinate in [0, 1). Box: every coordinate in [0, L_k].
  bool contains(const Vec& p) const noexcept;

  bool operator==(const Geometry&) const = default;

 private:
  Geometry(GeometryKind kind, int dim, const Vec& extent)
      : kind_(kind), dim_(dim), extent_(extent) {}

  GeometryKind kind_;
  int dim_;
  Vec extent_;
};

/// Minimal-image displacement w with `to = from + w (mod Z^d)` on the torus,
/// each torus component in (-1/2, 1/2]; plain difference in the box.
/// Throws DomainError when either point lies outside the domain.
Vec min_displacement(const Geometry& g, const Vec& from, const Vec& to);

/// Same as min_displacement without the domain check. Inputs must be finite.
Vec displacement(const Geometry& g, const Vec& from, const Vec& to) noexcept;

/// Canonical representative in [0, 1)^d on the torus; identity in the box.
/// Throws DomainError on NaN or infinite coordinates.
Vec wrap(const Geometry& g, const Vec& p);

/// |min_displacement(a, b)|^2.
double squared_distance(const Geometry& g, const Vec& a, const Vec& b);

/// Unchecked squared_distance for hot loops.
double squared_distance_unchecked(const Geometry& g, const Vec& a, const Vec& b) noexcept;

inline double dot(const Vec& a, const Vec& b) noexcept {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm_squared(const Vec& a) noexcept { return dot(a, a); }

inline Vec operator+(const Vec& a, const Vec& b) noexcept {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Vec operator-(const Vec& a, const Vec& b) noexcept {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Vec operator-(const Vec& a) noexcept { return {-a[0], -a[1], -a[2]}; }

inline Vec operator*(double s, const Vec& a) noexcept {
  return {s * a[0], s * a[1], s * a[2]};
}

}  // namespace vma
