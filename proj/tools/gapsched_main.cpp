// gapsched CLI: learning phase, benchmark sweeps, and inspection tools.
//
// Exit codes: 0 success, 1 validation/runtime failure, 2 configuration error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gapsched/gapsched.hpp"

namespace {

using namespace gapsched;

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty())
    std::cout << content;
  else
    write_text_file(out_path, content);
}

int cmd_learn(const std::string& config_path) {
  const LoadedConfig lc = load_config(config_path);
  std::cerr << "learning: n=" << lc.config.learning.n << " count=" << lc.config.learning.count
            << " grid=" << lc.config.learning.grid << "\n";
  const LearningArtifacts art = run_learning_phase(lc.config);
  write_learning_artifacts(art, lc.config.output_dir);
  write_text_file(lc.config.output_dir / "learn_manifest.json",
                  make_manifest(lc.raw, {}).dump(2) + "\n");
  std::cerr << "mean fit (degree " << art.mean_curve.degree
            << ") rms residual: " << fmt_double(art.mean_curve.rms_residual) << "\n"
            << "median fit (degree " << art.median_curve.degree
            << ") rms residual: " << fmt_double(art.median_curve.rms_residual) << "\n"
            << "wrote artifacts to " << lc.config.output_dir.string() << "\n";
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& curves_dir) {
  const LoadedConfig lc = load_config(config_path);
  const std::filesystem::path dir(curves_dir);

  std::map<std::string, std::string> input_hashes;
  BezierGapCurve mean_curve, median_curve;
  bool have_mean = false, have_median = false;
  if (std::filesystem::exists(dir / "mean_curve.json")) {
    mean_curve = load_curve(dir / "mean_curve.json");
    input_hashes["mean_curve.json"] = sha256_hex(read_text_file(dir / "mean_curve.json"));
    have_mean = true;
  }
  if (std::filesystem::exists(dir / "median_curve.json")) {
    median_curve = load_curve(dir / "median_curve.json");
    input_hashes["median_curve.json"] = sha256_hex(read_text_file(dir / "median_curve.json"));
    have_median = true;
  }
  for (Protocol m : lc.config.benchmark.methods) {
    if (m == Protocol::heuristic_mean && !have_mean)
      throw ConfigError("method heuristic_mean needs " + (dir / "mean_curve.json").string());
    if (m == Protocol::heuristic_median && !have_median)
      throw ConfigError("method heuristic_median needs " + (dir / "median_curve.json").string());
  }

  std::cerr << "benchmark: " << to_string(lc.config.benchmark.problem_class)
            << " n=" << lc.config.benchmark.n << " count=" << lc.config.benchmark.count
            << " p=" << lc.config.benchmark.p_min << ".." << lc.config.benchmark.p_max << "\n";
  const BenchmarkRun run = run_benchmark(lc.config, mean_curve, median_curve);
  write_benchmark_outputs(run, lc.raw, input_hashes, lc.config.output_dir);

  int failed = 0;
  for (const ResultRecord& r : run.records)
    if (!r.error.empty()) ++failed;
  std::cerr << "wrote " << run.records.size() << " records ("
            << (run.records.size() - static_cast<std::size_t>(failed)) << " ok, " << failed
            << " failed) to " << lc.config.output_dir.string() << "\n";
  return failed == 0 ? 0 : 1;
}

int cmd_gaps(const std::string& instance_path, int grid, const std::string& out_path) {
  const LoadedInstance inst = load_instance(instance_path);
  const IsingModel model = inst.to_ising();
  const GapProfile profile = gap_profile(model, uniform_grid(grid));
  emit(profile_csv(profile), out_path);
  return 0;
}

int cmd_angles(const std::string& curve_path, int p, double kappa, double q,
               const std::string& out_path) {
  const BezierGapCurve curve = load_curve(curve_path);
  const AngleSchedule sched = derive_angles(p, kappa, q, curve);
  emit(schedule_csv(sched), out_path);
  if (sched.gap_floor_engaged)
    std::cerr << "note: gap floor (" << fmt_double(kGapFloor) << ") engaged\n";
  return 0;
}

// Built-in invariant suites: brute-force identities and the ODE-vs-circuit
// consistency check, each printed as one PASS/FAIL line.
int cmd_validate() {
  int failures = 0;
  auto report = [&failures](const char* name, bool ok, const std::string& detail = {}) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
  };

  {  // QUBO <-> Ising exactness, exhaustive over bitstrings
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 25 && ok; ++trial) {
      const int n = 2 + trial % 5;
      const QuboInstance qb = gen_random_qubo(n, -1.0, 1.0, derive_seed(7001, trial));
      const IsingModel m = qubo_to_ising(qb);
      for (std::uint64_t x = 0; x < (1ULL << n); ++x) {
        const double diff = std::abs(qubo_value(qb, x) - (m.spin_energy(x) + m.offset));
        worst = std::max(worst, diff);
        if (diff > 1e-12) ok = false;
      }
    }
    report("qubo_ising_exactness", ok, "max |f_Q - (E + offset)| = " + fmt_double(worst));
  }

  {  // gap endpoints against the diagonal oracle
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const QuboInstance qb = gen_random_qubo(6, -1.0, 1.0, derive_seed(7002, trial));
      const IsingModel m = qubo_to_ising(qb);
      const double g0 = gap_at(m, 0.0);
      std::vector<double> diag = diagonal_energies(m);
      std::sort(diag.begin(), diag.end());
      const double g1 = gap_at(m, 1.0);
      const double err = std::max(std::abs(g0 - 2.0), std::abs(g1 - (diag[1] - diag[0])));
      worst = std::max(worst, err);
      if (err > 1e-9) ok = false;
    }
    report("gap_endpoints", ok, "max endpoint error = " + fmt_double(worst));
  }

  {  // expectation bracketed by brute-force extrema
    bool ok = true;
    for (int trial = 0; trial < 5; ++trial) {
      const QuboInstance qb = gen_random_qubo(5, -1.0, 1.0, derive_seed(7003, trial));
      const IsingModel m = qubo_to_ising(qb);
      const Extrema ext = brute_force_extrema(m);
      Rng rng(derive_seed(7004, trial));
      std::vector<double> gs, bs;
      for (int k = 0; k < 4; ++k) {
        gs.push_back(rng.uniform(-1.0, 1.0));
        bs.push_back(rng.uniform(-1.0, 1.0));
      }
      const StateVector psi = run_layered_circuit(m, free_schedule(gs, bs));
      const double e = expectation(psi, m);
      if (e < ext.e_min - 1e-9 || e > ext.e_max + 1e-9) ok = false;
    }
    report("expectation_bracketing", ok);
  }

  {  // ODE vs layered circuit at matching (kappa, q)
    const QuboInstance qb = gen_random_qubo(4, -1.0, 1.0, derive_seed(7005, 0));
    const IsingModel m = qubo_to_ising(qb);
    const GapProfile prof = gap_profile(m, uniform_grid(21));
    const BezierGapCurve curve = fit_bezier(prof, 3);
    const OdeResult ode = ode_evolve(m, 0.5, 1.0, curve, 4000);
    const StateVector circ = run_layered_circuit(m, derive_angles(400, 0.5, 1.0, curve));
    const double fid = fidelity(ode.state, circ);
    report("ode_vs_circuit", fid >= 0.99, "fidelity = " + fmt_double(fid));
  }

  std::cout << (failures == 0 ? "all invariant suites passed" : "invariant failures present")
            << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral-gap-informed schedule learning for QAOA"};
  app.set_version_flag("--version", gapsched::kVersion);
  app.require_subcommand(1);

  std::string config_path, curves_dir, instance_path, curve_path, out_path;
  int grid = 101, p = 1;
  double kappa = 1.0, q = 1.0;

  CLI::App* learn = app.add_subcommand("learn", "run the learning phase (gap profiles + curve fits)");
  learn->add_option("--config", config_path, "experiment config JSON")->required();

  CLI::App* bench = app.add_subcommand("bench", "run the benchmark sweep against learned curves");
  bench->add_option("--config", config_path, "experiment config JSON")->required();
  bench->add_option("--curves", curves_dir, "directory holding mean_curve.json / median_curve.json")
      ->required();

  CLI::App* gaps = app.add_subcommand("gaps", "gap profile of a single instance");
  gaps->add_option("--instance", instance_path, "instance JSON file")->required();
  gaps->add_option("--grid", grid, "number of s-grid points")->check(CLI::Range(2, 100000));
  gaps->add_option("--out", out_path, "output CSV path (default: stdout)");

  CLI::App* angles = app.add_subcommand("angles", "derive the angle schedule from a curve");
  angles->add_option("--curve", curve_path, "curve JSON file")->required();
  angles->add_option("--p", p, "layer count")->required()->check(CLI::PositiveNumber);
  angles->add_option("--kappa", kappa, "schedule scale kappa > 0")->required();
  angles->add_option("--q", q, "gap exponent q >= 0")->required();
  angles->add_option("--out", out_path, "output CSV path (default: stdout)");

  app.add_subcommand("validate", "run the built-in invariant suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // bad usage is a configuration error
  }

  try {
    if (learn->parsed()) return cmd_learn(config_path);
    if (bench->parsed()) return cmd_bench(config_path, curves_dir);
    if (gaps->parsed()) return cmd_gaps(instance_path, grid, out_path);
    if (angles->parsed()) return cmd_angles(curve_path, p, kappa, q, out_path);
    return cmd_validate();
  } catch (const gapsched::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
