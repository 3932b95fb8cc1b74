#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "vma/dynamics.hpp"
#include "vma/geometry.hpp"

namespace vma {

enum class ExperimentKind { Energy, Support, EulerConvergence, EpComparison, SingleRun };
enum class HRule { Relative, Absolute };
enum class FlowChoice { TaylorGreen, Shear, Zero };

/// Fully resolved experiment description.
struct ExperimentSpec {
  ExperimentKind experiment = ExperimentKind::Energy;
  GeometryKind geometry = GeometryKind::Torus;
  int dimension = 2;
  /// Side length of the box in ConvexBox mode.
  double box_extent = 1.0;
  int grid_edge = 16;
  std::vector<double> epsilon{0.1};
  /// Relative: step = h * epsilon. Absolute: step = h.
  HRule h_rule = HRule::Relative;
  double h = 0.1;
  double t_end = 1.0;
  SolverKind solver = SolverKind::Auction;
  int record_every = 1;
  FlowChoice flow = FlowChoice::TaylorGreen;
  double flow_amplitude = 0.5;
  /// Euler-Poisson grid points per axis.
  int ep_resolution = 128;
  /// rho0 = 1 + eps^2 * ep_amplitude * cos(2 pi x).
  double ep_amplitude = 0.5;
  int density_bins = 0;
  std::string output_dir = "vma_out";
  std::uint64_t seed = 0;
  std::size_t exact_cap = 512;
  /// Writes wall-clock timings to timing.json (not byte-reproducible).
  bool record_runtime = false;
  /// Energy experiment: repeat every run with h / 2.
  bool h_refinement = true;

  double step_for(double eps) const { return h_rule == HRule::Relative ? h * eps : h; }
  std::size_t particles() const;
  Geometry make_geometry() const;
};

ExperimentSpec defaults_for(ExperimentKind kind);

std::string_view to_string(ExperimentKind kind);
std::vector<std::string> config_keys();

/// Parses `key = value` lines (`#` starts a comment, lists are `[a,b,c]`).
/// The `experiment` key selects the defaults the other keys override.
/// Throws ConfigError with the offending line number or field name.
ExperimentSpec parse_config(std::istream& in);
ExperimentSpec parse_config_file(const std::filesystem::path& path);

/// Throws ConfigError naming the first invalid field.
void validate(const ExperimentSpec& spec);

/// Every key in canonical order, one `key = value` per line; parses back to
/// the same spec.
std::string echo(const ExperimentSpec& spec);

}  // namespace vma
