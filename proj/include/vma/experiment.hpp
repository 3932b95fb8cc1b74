#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vma/config.hpp"
#include "vma/diagnostics.hpp"
#include "vma/dynamics.hpp"

namespace vma {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Reported only; never affects the exit code.
  bool advisory = false;
  std::string detail;
};

/// One simulation of an experiment: a single epsilon and step.
struct CaseResult {
  double epsilon = 0.0;
  double h = 0.0;
  /// Energy experiment: the h / 2 companion run.
  bool refined = false;
  Trajectory trajectory;
  double sup_H = 0.0;
  std::optional<double> sup_G;
  /// reassignment_energies.front() - reassignment_energies.back().
  double energy_decrease = 0.0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<CaseResult> cases;
  std::optional<SlopeFit> slope_H;
  std::optional<SlopeFit> slope_G;
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;
  /// Output file name -> content. Deterministic for a given spec.
  std::map<std::string, std::string> files;
  double runtime_s = 0.0;

  bool passed() const;
};

/// Exit codes of the command-line driver.
inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitAcceptance = 2;
inline constexpr int kExitRuntime = 3;

/// Worker threads for the epsilon list: VMA_THREADS when set, otherwise the
/// hardware concurrency. Throws ConfigError on a malformed value.
int worker_threads();

/// Runs every case of the experiment (concurrently up to `threads`, 0 meaning
/// worker_threads()), evaluates its checks and renders the output files.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 0);

/// Writes result.files under `dir`, creating it when needed.
void write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir);

/// One line per check: `PASS name: detail`, `FAIL ...` or `WARN ...`.
std::string format_checks(const ExperimentResult& result);

/// Comment header shared by every output file.
std::string artifact_header(const ExperimentSpec& spec, std::string_view prefix);

std::string_view version();

}  // namespace vma
