#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "vma/geometry.hpp"

namespace vma {

/// Empirical phase-space measure: N particles of weight 1/N with positions,
/// velocities and the coupling constant epsilon.
struct ParticleCloud {
  Geometry geometry = Geometry::torus(1);
  std::vector<Vec> positions;
  std::vector<Vec> velocities;
  double epsilon = 1.0;
  double time = 0.0;

  std::size_t size() const noexcept { return positions.size(); }

  /// Throws ArgumentError on mismatched lengths, non-finite entries or
  /// epsilon <= 0; DomainError when a torus position is not wrapped.
  void validate() const;
};

/// Time-independent vector field evaluated at a point.
using VelocityField = std::function<Vec(const Vec&)>;

}  // namespace vma
