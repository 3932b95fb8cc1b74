#include <exception>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "vma/config.hpp"
#include "vma/errors.hpp"
#include "vma/experiment.hpp"

namespace {

int execute(const std::string& path, bool check) {
  const vma::ExperimentSpec spec = vma::parse_config_file(path);
  std::cout << vma::artifact_header(spec, "# ");
  vma::ExperimentResult result = vma::run_experiment(spec);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  vma::write_artifacts(result, spec.output_dir);
  std::cout << vma::format_checks(result);
  bool ok = result.passed();
  if (check) {
    const vma::ExperimentResult again = vma::run_experiment(spec);
    auto strip_runtime = [&](const vma::ExperimentResult& r) {
      auto files = r.files;
      if (spec.record_runtime) files.erase("summary.json");
      return files;
    };
    const bool same = strip_runtime(result) == strip_runtime(again);
    std::cout << (same ? "PASS" : "FAIL") << " determinism: rerun outputs "
              << (same ? "byte-identical" : "differ") << '\n';
    ok = ok && same;
  }
  std::cout << (ok ? "RESULT PASS" : "RESULT FAIL") << " (outputs in " << spec.output_dir << ")\n";
  return ok ? vma::kExitPass : vma::kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle simulator for the discrete Vlasov-Monge-Ampere model"};
  app.set_version_flag("--version", std::string(vma::version()));
  app.require_subcommand(1);

  std::string run_path;
  auto* run = app.add_subcommand("run", "Run an experiment and write its outputs");
  run->add_option("config", run_path, "Configuration file")->required()->check(CLI::ExistingFile);

  std::string check_path;
  auto* check = app.add_subcommand("check", "Run an experiment twice and assert its acceptance checks");
  check->add_option("config", check_path, "Configuration file")->required()->check(CLI::ExistingFile);

  std::string experiment = "energy";
  auto* dump = app.add_subcommand("dump-defaults", "Print the default configuration of an experiment");
  dump->add_option("experiment", experiment, "Experiment name")
      ->check(CLI::IsMember({"energy", "support", "euler_convergence", "ep_comparison", "single_run"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vma::kExitUsage;
  }

  try {
    if (*dump) {
      std::istringstream in("experiment = " + experiment + "\n");
      std::cout << vma::echo(vma::parse_config(in));
      return vma::kExitPass;
    }
    return execute(*run ? run_path : check_path, static_cast<bool>(*check));
  } catch (const vma::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return vma::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vma::kExitRuntime;
  }
}
