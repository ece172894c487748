// Command-line front end: run, sweep, mesh-info, validate-config.

#include <crowdflow/log.hpp>
#include <crowdflow/scenario.hpp>
#include <crowdflow/sweep.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace crowdflow;

namespace {

int do_run(const fs::path& config, const fs::path& out, int threads, std::optional<double> snapshot_every) {
  const Scenario s = load_scenario(config);
  RunOptions opt;
  opt.out = out;
  opt.threads = threads;
  opt.snapshot_every = snapshot_every;
  const RunReport r = run_scenario(s, opt);
  std::cout << "T = " << format_number(r.time_scale) << " s\n"
            << "Ta/T = " << format_number(r.egress_time) << '\n'
            << "delta_rho = " << format_number(r.delta_rho) << '\n'
            << "steps = " << r.steps << '\n';
  return 0;
}

int do_sweep(const fs::path& config, const fs::path& out, int threads, std::vector<double> cs,
             std::vector<double> thetas, std::optional<double> target_ta, std::optional<double> target_drho,
             double theta_ref) {
  const Scenario s = load_scenario(config);
  std::sort(cs.begin(), cs.end());
  std::sort(thetas.begin(), thetas.end());
  const SweepTable table = run_sweep(s, cs, thetas, threads);
  fs::create_directories(out);
  {
    std::ofstream os(out / "sweep.csv");
    write_sweep_csv(table, os);
  }
  int failed = 0;
  for (const auto& cell : table.cells) failed += !cell.ok();
  if (failed) {
    std::ofstream os(out / "sweep_errors.txt");
    write_sweep_errors(table, os);
    std::cerr << failed << " sweep cell(s) failed, see sweep_errors.txt\n";
  }
  if (target_ta || target_drho) {
    const auto t = tune(table, target_ta.value_or(5.2), target_drho.value_or(0.0), theta_ref);
    std::ofstream os(out / "tuning.txt");
    if (t) {
      os << "c = " << format_number(t->c) << "\ntheta_deg = " << format_number(t->theta_deg) << '\n';
      std::cout << "tuned c = " << format_number(t->c) << ", theta = " << format_number(t->theta_deg) << " deg\n";
    } else {
      os << "targets not bracketed by the sweep grid\n";
      std::cerr << "tuning targets not bracketed by the sweep grid\n";
    }
  }
  std::cout << table.cells.size() << " cells written to " << (out / "sweep.csv").string() << '\n';
  return 0;
}

int do_mesh_info(const std::optional<fs::path>& config, const std::optional<fs::path>& mesh_file,
                 const std::optional<fs::path>& save) {
  if (mesh_file) {
    const TriMesh mesh = load_mesh(mesh_file->string());
    describe_mesh(mesh, std::cout);
    return 0;
  }
  if (!config) throw CLI::ValidationError("mesh-info", "needs --config or --mesh");
  const Scenario s = load_scenario(*config);
  const TriMesh mesh = generate_mesh(DomainSpec::by_name(s.domain, s.width / s.length, s.buffer_depth() / s.length),
                                     s.mesh_size / s.length);
  describe_mesh(mesh, std::cout, s.length);
  if (save) save_mesh(mesh, save->string());
  return 0;
}

int do_validate(const fs::path& config) {
  try {
    const Scenario s = load_scenario(config);
    std::cout << "ok\n";
    write_scenario(s, std::cout);
    return 0;
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) std::cerr << p << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Macroscopic crowd-flow simulator for walkways"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Log info messages");
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");

  fs::path config, out = "out";
  int threads = 1;
  std::optional<double> snapshot_every;

  auto* run = app.add_subcommand("run", "Run one scenario and write its artifacts");
  run->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--snapshot-every", snapshot_every, "Snapshot interval in scaled time")
      ->check(CLI::NonNegativeNumber);

  std::vector<double> cs{2.5e-4, 5e-4, 7.5e-4, 10e-4, 12.5e-4};
  std::vector<double> thetas{0, 1, 2, 3, 4, 5};
  std::optional<double> target_ta, target_drho;
  double theta_ref = 2.0;
  auto* sweep = app.add_subcommand("sweep", "Run a (c, theta) grid and write sweep.csv");
  sweep->add_option("--config", config, "Base scenario file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "Output directory");
  sweep->add_option("--threads", threads, "Parallel sweep cells")->check(CLI::PositiveNumber);
  sweep->add_option("--c", cs, "Repulsion values")->delimiter(',');
  sweep->add_option("--theta", thetas, "Angles in degrees")->delimiter(',');
  sweep->add_option("--target-ta", target_ta, "Tuning target for Ta/T");
  sweep->add_option("--target-drho", target_drho, "Tuning target for delta_rho");
  sweep->add_option("--theta-ref", theta_ref, "Reference angle for the first tuning pass");

  std::optional<fs::path> mesh_config, mesh_file, mesh_save;
  auto* info = app.add_subcommand("mesh-info", "Print mesh statistics and boundary census");
  info->add_option("--config", mesh_config, "Scenario file")->check(CLI::ExistingFile);
  info->add_option("--mesh", mesh_file, "Mesh file to inspect instead")->check(CLI::ExistingFile);
  info->add_option("--out", mesh_save, "Write the generated mesh here");

  auto* check = app.add_subcommand("validate-config", "Check a scenario file");
  check->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  set_log_level(quiet ? LogLevel::quiet : verbose ? LogLevel::info : LogLevel::warning);

  try {
    if (*run) return do_run(config, out, threads, snapshot_every);
    if (*sweep) return do_sweep(config, out, threads, cs, thetas, target_ta, target_drho, theta_ref);
    if (*info) return do_mesh_info(mesh_config, mesh_file, mesh_save);
    if (*check) return do_validate(config);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return 3;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
