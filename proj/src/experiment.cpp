#include "vma/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "vma/errors.hpp"
#include "vma/reference.hpp"

namespace vma {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Euler-Poisson substeps resolve the plasma period 2 pi eps at least this finely.
constexpr double kEpStepsPerPeriod = 64.0;

struct Job {
  double epsilon;
  double h;
  bool refined;
};

std::optional<EulerFlow> reference_flow(const ExperimentSpec& spec) {
  switch (spec.flow) {
    case FlowChoice::TaylorGreen:
      return EulerFlow::taylor_green(spec.flow_amplitude);
    case FlowChoice::Shear:
      return EulerFlow::shear([a = spec.flow_amplitude](double y) { return a * std::sin(kTwoPi * y); });
    case FlowChoice::Zero:
      return EulerFlow::constant({0.0, 0.0, 0.0});
  }
  return std::nullopt;
}

std::string case_label(std::size_t index, const Job& job) {
  return "run_" + std::to_string(index) + "_eps" + format_double(job.epsilon) +
         (job.refined ? "_refined" : "");
}

struct CaseOutput {
  CaseResult result;
  std::string csv;
  std::string ep_csv;
};

CaseOutput run_case(const ExperimentSpec& spec, const Job& job) {
  const Geometry geometry = spec.make_geometry();
  const TargetGrid grid = TargetGrid::lattice(geometry, spec.grid_edge);
  const std::optional<EulerFlow> flow = reference_flow(spec);

  ReferenceProbe probe;
  ParticleCloud cloud;
  if (spec.experiment == ExperimentKind::EpComparison) {
    const double eps = job.epsilon;
    const double amp = eps * eps * spec.ep_amplitude;
    auto factor = [amp](double x) { return 1.0 + amp * std::cos(kTwoPi * x); };
    cloud = init_from_density(grid, Density::along_axes({factor, {}, {}}), {}, eps);
    const EulerPoissonSolver solver(spec.dimension, spec.ep_resolution);
    EpState ep = solver.make_state(
        eps, [&](const Vec& x) { return factor(x[0]); }, [](const Vec&) { return Vec{0.0, 0.0, 0.0}; });
    probe.attach_ep(std::move(ep), kTwoPi * eps / kEpStepsPerPeriod);
  } else {
    VelocityField v0;
    if (flow) v0 = flow->initial_velocity();
    cloud = init_monokinetic(grid, v0, job.epsilon);
  }
  if (flow) probe.attach_flow(*flow);

  SimConfig config;
  config.h = job.h;
  config.t_end = spec.t_end;
  config.solver = spec.solver;
  config.seed = spec.seed;
  config.record_every = spec.record_every;
  config.density_bins = spec.density_bins;
  config.exact.max_size = spec.exact_cap;

  std::ostringstream csv;
  csv << artifact_header(spec, "# ");
  csv << "# epsilon = " << format_double(job.epsilon) << "\n# step = " << format_double(job.h) << '\n';
  write_record_header(csv);

  CaseOutput out;
  out.result.epsilon = job.epsilon;
  out.result.h = job.h;
  out.result.refined = job.refined;
  out.result.trajectory =
      run(cloud, grid, config, &probe, [&](const DiagnosticRecord& r) { write_record_row(csv, r); });
  out.csv = csv.str();

  const Trajectory& tr = out.result.trajectory;
  for (const auto& r : tr.records) {
    if (r.H_eps) out.result.sup_H = std::max(out.result.sup_H, *r.H_eps);
    if (r.G_eps) out.result.sup_G = std::max(out.result.sup_G.value_or(0.0), *r.G_eps);
  }
  out.result.energy_decrease = tr.reassignment_energies.front() - tr.reassignment_energies.back();
  if (probe.ep_state()) {
    std::ostringstream ep;
    ep << artifact_header(spec, "# ");
    ep << "# epsilon = " << format_double(job.epsilon) << "\n# t = " << format_double(probe.ep_state()->time)
       << '\n';
    write_ep_csv(ep, *probe.ep_state());
    out.ep_csv = ep.str();
  }
  return out;
}

std::vector<Job> jobs_for(const ExperimentSpec& spec) {
  std::vector<Job> jobs;
  for (double eps : spec.epsilon) {
    jobs.push_back({eps, spec.step_for(eps), false});
    if (spec.experiment == ExperimentKind::Energy && spec.h_refinement)
      jobs.push_back({eps, 0.5 * spec.step_for(eps), true});
  }
  return jobs;
}

std::string fmt(double x) { return format_double(x); }

void add_check(ExperimentResult& r, std::string name, bool passed, std::string detail, bool advisory = false) {
  r.checks.push_back({std::move(name), passed, advisory, std::move(detail)});
}

std::optional<SlopeFit> slope_of(const std::vector<std::pair<double, double>>& pairs, std::string& why) {
  try {
    return fit_slope(pairs);
  } catch (const ArgumentError& e) {
    why = e.what();
    return std::nullopt;
  }
}

void evaluate_checks(ExperimentResult& r) {
  const ExperimentSpec& spec = r.spec;
  const Geometry geometry = spec.make_geometry();

  const bool conservation = spec.experiment == ExperimentKind::Energy ||
                            spec.experiment == ExperimentKind::SingleRun;
  if (conservation) {
    double drift = 0.0;
    bool monotone = true;
    for (const auto& c : r.cases) {
      drift = std::max(drift, c.trajectory.max_interval_drift);
      monotone = monotone && c.trajectory.energy_monotone;
    }
    add_check(r, "frozen_sigma_drift", drift <= 1e-12, "max relative drift " + fmt(drift) + " <= 1e-12");
    add_check(r, "energy_monotone", monotone, monotone ? "E_n non-increasing" : "E_n increased");
  }

  if (spec.experiment == ExperimentKind::Energy && spec.h_refinement) {
    for (std::size_t i = 0; i + 1 < r.cases.size(); i += 2) {
      const CaseResult& coarse = r.cases[i];
      const CaseResult& fine = r.cases[i + 1];
      const double ratio = fine.energy_decrease > 0.0 ? coarse.energy_decrease / fine.energy_decrease
                                                      : (coarse.energy_decrease > 0.0 ? INFINITY : 0.0);
      add_check(r, "h_refinement_eps" + fmt(coarse.epsilon), ratio >= 1.5,
                "decrease " + fmt(coarse.energy_decrease) + " / " + fmt(fine.energy_decrease) + " = " +
                    fmt(ratio) + " >= 1.5");
    }
  }

  if (spec.experiment == ExperimentKind::Support) {
    const double R = geometry.radius();
    for (const auto& c : r.cases) {
      const auto& recs = c.trajectory.records;
      const double C = recs.front().max_support;
      bool ok = true;
      double worst = -INFINITY;
      for (const auto& rec : recs) {
        const double bound = C + R * rec.t / c.epsilon;
        ok = ok && rec.max_support <= bound;
        worst = std::max(worst, rec.max_support - bound);
      }
      add_check(r, "support_bound_eps" + fmt(c.epsilon), ok,
                "max(support - (C + R t / eps)) = " + fmt(worst) + " <= 0 with C = " + fmt(C) + ", R = " + fmt(R));
    }
  }

  std::vector<std::pair<double, double>> h_pairs, g_pairs;
  for (const auto& c : r.cases) {
    if (c.refined) continue;
    h_pairs.emplace_back(c.epsilon, c.sup_H);
    if (c.sup_G) g_pairs.emplace_back(c.epsilon, *c.sup_G);
  }
  std::string why_h, why_g;
  if (h_pairs.size() >= 3) r.slope_H = slope_of(h_pairs, why_h);
  if (g_pairs.size() >= 3) r.slope_G = slope_of(g_pairs, why_g);

  if (spec.experiment == ExperimentKind::EulerConvergence) {
    const bool ok = r.slope_H && r.slope_H->slope >= 1.5 && r.slope_H->slope <= 2.5;
    add_check(r, "slope_H", ok,
              r.slope_H ? "slope " + fmt(r.slope_H->slope) + " in [1.5, 2.5]" : "no slope: " + why_h);
  }

  if (spec.experiment == ExperimentKind::EpComparison) {
    bool decreasing = true;
    std::string ratios;
    double prev = INFINITY;
    for (const auto& c : r.cases) {
      const double ratio = c.sup_G.value_or(0.0) / c.sup_H;
      ratios += (ratios.empty() ? "" : ", ") + fmt(ratio);
      decreasing = decreasing && ratio < prev;
      prev = ratio;
    }
    add_check(r, "G_over_H_decreasing", decreasing, "sup G / sup H = [" + ratios + "]");
    const bool ok = r.slope_G && r.slope_G->slope >= 2.3 && r.slope_G->slope <= 3.7;
    add_check(r, "slope_G", ok,
              r.slope_G ? "slope " + fmt(r.slope_G->slope) + " in [2.3, 3.7]" : "no slope: " + why_g);
  }

  if (geometry.is_torus()) {
    const double n = static_cast<double>(spec.particles());
    const double d = spec.dimension;
    const double bound = std::sqrt(d) / 2.0 + 2.0 / std::pow(n, 1.0 / d);
    double worst = 0.0;
    for (const auto& c : r.cases)
      for (const auto& rec : c.trajectory.records) worst = std::max(worst, rec.max_displacement);
    add_check(r, "displacement_bound", worst <= bound, "max |W| " + fmt(worst) + " <= " + fmt(bound), true);
  }
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

std::string render_summary(const ExperimentResult& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["_header"] = {{"artifact", "vma"}, {"version", std::string(version())}, {"config", echo(r.spec)}};
  j["experiment"] = std::string(to_string(r.spec.experiment));
  ordered_json eps = ordered_json::array(), sup_h = ordered_json::array(), sup_g = ordered_json::array();
  for (const auto& c : r.cases) {
    if (c.refined) continue;
    eps.push_back(c.epsilon);
    sup_h.push_back(c.sup_H);
    sup_g.push_back(optional_json(c.sup_G));
  }
  j["epsilons"] = eps;
  j["sup_H"] = sup_h;
  j["sup_G"] = sup_g;
  j["slope_H"] = r.slope_H ? ordered_json(r.slope_H->slope) : ordered_json(nullptr);
  j["slope_G"] = r.slope_G ? ordered_json(r.slope_G->slope) : ordered_json(nullptr);
  j["runtime_s"] = r.spec.record_runtime ? ordered_json(r.runtime_s) : ordered_json(nullptr);
  ordered_json cases = ordered_json::array();
  for (const auto& c : r.cases) {
    const Trajectory& t = c.trajectory;
    cases.push_back({{"epsilon", c.epsilon},
                     {"h", c.h},
                     {"refined", c.refined},
                     {"steps", t.steps},
                     {"sup_H", c.sup_H},
                     {"sup_G", optional_json(c.sup_G)},
                     {"max_interval_drift", t.max_interval_drift},
                     {"energy_monotone", t.energy_monotone},
                     {"energy_decrease", c.energy_decrease},
                     {"reassigned_particles", t.reassigned_particles}});
  }
  j["cases"] = cases;
  ordered_json checks = ordered_json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"advisory", c.advisory}, {"detail", c.detail}});
  j["checks"] = checks;
  j["passed"] = r.passed();
  return j.dump(2) + "\n";
}

}  // namespace

std::string_view version() { return VMA_VERSION; }

std::string artifact_header(const ExperimentSpec& spec, std::string_view prefix) {
  std::string out = std::string(prefix) + "vma " + std::string(version()) + "\n";
  std::istringstream lines(echo(spec));
  std::string line;
  while (std::getline(lines, line)) out += std::string(prefix) + line + "\n";
  return out;
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.advisory || c.passed; });
}

int worker_threads() {
  if (const char* env = std::getenv("VMA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("VMA_THREADS must be a positive integer");
    return static_cast<int>(std::min(v, 1024L));
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
  validate(spec);
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Job> jobs = jobs_for(spec);
  std::vector<std::optional<CaseOutput>> outputs(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());

  const int workers =
      std::max(1, std::min(threads > 0 ? threads : worker_threads(), static_cast<int>(jobs.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        outputs[i] = run_case(spec, jobs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentResult result;
  result.spec = spec;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    CaseOutput& out = *outputs[i];
    const std::string label = case_label(i, jobs[i]);
    result.files[label + ".csv"] = std::move(out.csv);
    if (!out.ep_csv.empty()) result.files["ep_" + label.substr(4) + ".csv"] = std::move(out.ep_csv);
    for (const auto& w : out.result.trajectory.warnings) result.warnings.push_back(label + ": " + w);
    result.cases.push_back(std::move(out.result));
  }
  evaluate_checks(result);
  result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.files["summary.json"] = render_summary(result);
  return result;
}

void write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : result.files) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << content;
  }
}

std::string format_checks(const ExperimentResult& result) {
  std::string out;
  for (const auto& c : result.checks) {
    const char* tag = c.passed ? "PASS" : (c.advisory ? "WARN" : "FAIL");
    out += std::string(tag) + " " + c.name + ": " + c.detail + "\n";
  }
  return out;
}

}  // namespace vma
