#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gapsched/bezier.hpp"
#include "gapsched/errors.hpp"
#include "gapsched/io.hpp"
#include "gapsched/optimize.hpp"
#include "gapsched/problems.hpp"
#include "gapsched/rng.hpp"
#include "gapsched/schedule.hpp"
#include "gapsched/simulator.hpp"
#include "gapsched/spectrum.hpp"
#include "gapsched/version.hpp"

namespace gapsched {

// ---- metrics ---------------------------------------------------------------

// r = (E_max - E) / (E_max - E_min), in [0, 1]: 1 at the ground state.
inline double approximation_ratio(double energy, double e_min, double e_max) {
  if (!(e_min < e_max))
    throw std::invalid_argument("approximation_ratio: degenerate spectrum (e_min = e_max)");
  const double tol = 1e-9 * std::max(1.0, std::abs(e_max - e_min));
  if (energy < e_min - tol || energy > e_max + tol)
    throw std::invalid_argument("approximation_ratio: energy outside [e_min, e_max]");
  return (e_max - energy) / (e_max - e_min);
}

// MaxCut specialization under C_min = 0: expected cut over best cut.
inline double maxcut_ratio(double expected_cut, double c_max) {
  if (!(c_max > 0.0))
    throw std::invalid_argument("maxcut_ratio: c_max must be positive (edgeless graph)");
  const double tol = 1e-9 * std::max(1.0, c_max);
  if (expected_cut < -tol || expected_cut > c_max + tol)
    throw std::invalid_argument("maxcut_ratio: expected cut outside [0, c_max]");
  return expected_cut / c_max;
}

// ---- configuration ---------------------------------------------------------

enum class ProblemClass { qubo_random, maxcut_3reg_unweighted, maxcut_3reg_weighted };

inline const char* to_string(ProblemClass c) {
  switch (c) {
    case ProblemClass::qubo_random: return "qubo_random";
    case ProblemClass::maxcut_3reg_unweighted: return "maxcut_3reg_unweighted";
    case ProblemClass::maxcut_3reg_weighted: return "maxcut_3reg_weighted";
  }
  return "qubo_random";
}

inline ProblemClass problem_class_from_string(const std::string& s) {
  if (s == "qubo_random") return ProblemClass::qubo_random;
  if (s == "maxcut_3reg_unweighted") return ProblemClass::maxcut_3reg_unweighted;
  if (s == "maxcut_3reg_weighted") return ProblemClass::maxcut_3reg_weighted;
  throw ConfigError("unknown problem class \"" + s + "\"");
}

inline Protocol protocol_from_string(const std::string& s) {
  if (s == "heuristic_mean") return Protocol::heuristic_mean;
  if (s == "heuristic_median") return Protocol::heuristic_median;
  if (s == "vanilla_qaoa") return Protocol::vanilla_qaoa;
  throw ConfigError("unknown method \"" + s + "\"");
}

struct LearningConfig {
  int n = 8;
  double lo = -1.0, hi = 1.0;
  int count = 500;
  int grid = 101;
  std::uint64_t seed = 1;
};

struct CurveConfig {
  int mean_degree = 3;
  int median_degree = 7;
};

struct BenchmarkConfig {
  ProblemClass problem_class = ProblemClass::qubo_random;
  int n = 12;
  double lo = -100.0, hi = 100.0;  // coefficient range (QUBO) or weight range (weighted MaxCut)
  int count = 20;
  int p_min = 1, p_max = 6;
  std::vector<Protocol> methods = {Protocol::heuristic_mean, Protocol::heuristic_median,
                                   Protocol::vanilla_qaoa};
  int budget = 200;
  std::uint64_t seed = 2;
};

struct ExperimentConfig {
  LearningConfig learning;
  CurveConfig curves;
  BenchmarkConfig benchmark;
  std::filesystem::path output_dir = "out";
  int threads = 1;

  void validate() const {
    if (learning.count < 1 || benchmark.count < 1)
      throw ConfigError("instance counts must be >= 1");
    if (learning.grid < 2) throw ConfigError("learning grid must have >= 2 points");
    if (benchmark.p_min < 1 || benchmark.p_max < benchmark.p_min)
      throw ConfigError("p range must be nonempty with p >= 1");
    if (benchmark.methods.empty()) throw ConfigError("methods list must be nonempty");
    if (benchmark.budget < 1) throw ConfigError("optimizer budget must be >= 1");
    if (curves.mean_degree < 1 || curves.median_degree < 1)
      throw ConfigError("curve degrees must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const char* section,
                                std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok)
      throw ConfigError(std::string("unknown key \"") + key + "\" in " + section);
  }
}

}  // namespace detail

// Parses the JSON-compatible config document. All seeds are explicit in the
// document; relative output paths are resolved against base_dir (the config
// file's directory).
inline ExperimentConfig config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  try {
    detail::reject_unknown_keys(j, "config",
                                {"learning", "curves", "benchmark", "output_dir", "threads"});
    const auto& jl = j.at("learning");
    detail::reject_unknown_keys(jl, "learning", {"n", "lo", "hi", "count", "grid", "seed"});
    cfg.learning.n = jl.at("n").get<int>();
    cfg.learning.lo = jl.at("lo").get<double>();
    cfg.learning.hi = jl.at("hi").get<double>();
    cfg.learning.count = jl.at("count").get<int>();
    cfg.learning.grid = jl.value("grid", 101);
    cfg.learning.seed = jl.at("seed").get<std::uint64_t>();

    if (j.contains("curves")) {
      const auto& jc = j.at("curves");
      detail::reject_unknown_keys(jc, "curves", {"mean_degree", "median_degree"});
      cfg.curves.mean_degree = jc.value("mean_degree", 3);
      cfg.curves.median_degree = jc.value("median_degree", 7);
    }

    const auto& jb = j.at("benchmark");
    detail::reject_unknown_keys(jb, "benchmark",
                                {"problem_class", "n", "lo", "hi", "count", "p_min", "p_max",
                                 "methods", "budget", "seed"});
    cfg.benchmark.problem_class =
        problem_class_from_string(jb.at("problem_class").get<std::string>());
    cfg.benchmark.n = jb.at("n").get<int>();
    cfg.benchmark.lo = jb.value("lo", 0.0);
    cfg.benchmark.hi = jb.value("hi", 0.0);
    cfg.benchmark.count = jb.at("count").get<int>();
    cfg.benchmark.p_min = jb.at("p_min").get<int>();
    cfg.benchmark.p_max = jb.at("p_max").get<int>();
    if (jb.contains("methods")) {
      cfg.benchmark.methods.clear();
      for (const auto& m : jb.at("methods"))
        cfg.benchmark.methods.push_back(protocol_from_string(m.get<std::string>()));
    }
    cfg.benchmark.budget = jb.value("budget", 200);
    cfg.benchmark.seed = jb.at("seed").get<std::uint64_t>();

    std::filesystem::path out = j.value("output_dir", std::string("out"));
    cfg.output_dir = out.is_absolute() ? out : base_dir / out;
    cfg.threads = j.value("threads", 1);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config document: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

struct LoadedConfig {
  ExperimentConfig config;
  std::string raw;  // file bytes, hashed into the manifest
};

inline LoadedConfig load_config(const std::filesystem::path& path) {
  LoadedConfig lc;
  try {
    lc.raw = read_text_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());  // an unreadable config file is a config error
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(lc.raw);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config file " + path.string() + ": " + e.what());
  }
  lc.config = config_from_json(j, std::filesystem::absolute(path).parent_path());
  return lc;
}

// ---- learning phase --------------------------------------------------------

struct LearningArtifacts {
  std::vector<GapProfile> profiles;
  GapProfile mean_profile, median_profile;
  BezierGapCurve mean_curve, median_curve;
};

inline LearningArtifacts run_learning_phase(const ExperimentConfig& cfg,
                                            const EigsOptions& eigs = {}) {
  cfg.validate();
  LearningArtifacts art;
  EnsembleSpec spec;
  spec.n = cfg.learning.n;
  spec.lo = cfg.learning.lo;
  spec.hi = cfg.learning.hi;
  spec.count = cfg.learning.count;
  spec.seed_base = cfg.learning.seed;
  const std::vector<double> grid = uniform_grid(cfg.learning.grid);
  art.profiles = sample_ensemble_gaps(spec, grid, eigs, cfg.threads);
  art.mean_profile = aggregate_profiles(art.profiles, Aggregation::mean);
  art.median_profile = aggregate_profiles(art.profiles, Aggregation::median);
  art.mean_curve = fit_bezier(art.mean_profile, cfg.curves.mean_degree);
  art.mean_curve.source_profile_id =
      "mean_n" + std::to_string(spec.n) + "_m" + std::to_string(spec.count);
  art.median_curve = fit_bezier(art.median_profile, cfg.curves.median_degree);
  art.median_curve.source_profile_id =
      "median_n" + std::to_string(spec.n) + "_m" + std::to_string(spec.count);
  return art;
}

inline void write_learning_artifacts(const LearningArtifacts& art,
                                     const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  write_text_file(outdir / "profiles.csv", ensemble_csv(art.profiles));
  write_text_file(outdir / "aggregate.csv", aggregate_csv(art.mean_profile, art.median_profile));
  write_text_file(outdir / "final_gaps.csv", final_gaps_csv(final_gap_distribution(art.profiles)));
  save_curve(art.mean_curve, outdir / "mean_curve.json");
  save_curve(art.median_curve, outdir / "median_curve.json");
  const nlohmann::json residuals = {
      {"mean", {{"degree", art.mean_curve.degree}, {"rms_residual", art.mean_curve.rms_residual}}},
      {"median",
       {{"degree", art.median_curve.degree}, {"rms_residual", art.median_curve.rms_residual}}}};
  write_text_file(outdir / "residuals.json", residuals.dump(2) + "\n");
}

// ---- benchmark phase -------------------------------------------------------

struct ResultRecord {
  std::string problem_class;
  int instance_id = 0;
  std::string method;
  int p = 0;
  double ratio = 0.0;
  std::vector<double> best_params;
  int evaluations_used = 0;
  std::string error;  // empty on success; rows are kept even when a cell fails
};

struct BenchmarkRun {
  std::vector<ResultRecord> records;
  std::vector<double> wall_times;  // seconds, parallel to records
};

// Benchmark instance i: generated with derive_seed(seed, i), converted to an
// Ising model, then rescaled by the alpha = 2/(q_max - q_min) rule on the
// generation range. Unweighted MaxCut has a degenerate range and is left
// unscaled.
inline IsingModel make_benchmark_model(const BenchmarkConfig& bench, int instance_id) {
  const std::uint64_t seed = derive_seed(bench.seed, static_cast<std::uint64_t>(instance_id));
  switch (bench.problem_class) {
    case ProblemClass::qubo_random: {
      QuboInstance q = gen_random_qubo(bench.n, bench.lo, bench.hi, seed);
      IsingModel m = qubo_to_ising(q);
      if (bench.hi > bench.lo) m = rescale_ising(m, bench.lo, bench.hi);
      return m;
    }
    case ProblemClass::maxcut_3reg_unweighted: {
      GraphInstance g = gen_regular_graph(bench.n, 3, std::nullopt, seed);
      return maxcut_to_ising(g);
    }
    case ProblemClass::maxcut_3reg_weighted: {
      GraphInstance g =
          gen_regular_graph(bench.n, 3, std::make_pair(bench.lo, bench.hi), seed);
      IsingModel m = maxcut_to_ising(g);
      if (bench.hi > bench.lo) m = rescale_ising(m, bench.lo, bench.hi);
      return m;
    }
  }
  throw std::logic_error("make_benchmark_model: unreachable");
}

inline BenchmarkRun run_benchmark(const ExperimentConfig& cfg, const BezierGapCurve& mean_curve,
                                  const BezierGapCurve& median_curve) {
  cfg.validate();
  for (Protocol m : cfg.benchmark.methods)
    if (m != Protocol::vanilla_qaoa)
      (m == Protocol::heuristic_mean ? mean_curve : median_curve).validate();

  const BenchmarkConfig& bench = cfg.benchmark;
  const bool is_maxcut = bench.problem_class != ProblemClass::qubo_random;
  const int n_p = bench.p_max - bench.p_min + 1;
  const int per_instance = static_cast<int>(bench.methods.size()) * n_p;
  const int total = bench.count * per_instance;

  BenchmarkRun run;
  run.records.resize(static_cast<std::size_t>(total));
  run.wall_times.assign(static_cast<std::size_t>(total), 0.0);

  std::atomic<int> next_instance{0};
  auto worker = [&]() {
    for (;;) {
      const int inst = next_instance.fetch_add(1);
      if (inst >= bench.count) return;

      // instance-level work shared across every (method, p) cell
      IsingModel model;
      Extrema ext;
      std::shared_ptr<const std::vector<double>> diag;
      std::string instance_error;
      try {
        model = make_benchmark_model(bench, inst);
        ext = brute_force_extrema(model);
        diag = std::make_shared<const std::vector<double>>(
            diagonal_energies(model, kSimulationCap));
      } catch (const std::exception& e) {
        instance_error = e.what();
      }

      int cell = 0;
      for (std::size_t mi = 0; mi < bench.methods.size(); ++mi) {
        for (int p = bench.p_min; p <= bench.p_max; ++p, ++cell) {
          const std::size_t row = static_cast<std::size_t>(inst * per_instance + cell);
          ResultRecord& rec = run.records[row];
          rec.problem_class = to_string(bench.problem_class);
          rec.instance_id = inst;
          rec.method = to_string(bench.methods[mi]);
          rec.p = p;
          if (!instance_error.empty()) {
            rec.error = instance_error;
            rec.ratio = std::numeric_limits<double>::quiet_NaN();
            continue;
          }
          const auto t0 = std::chrono::steady_clock::now();
          try {
            ObjectiveSpec spec;
            spec.model = model;
            spec.p = p;
            spec.direction =
                is_maxcut ? Direction::minimize_negated : Direction::minimize_energy;
            spec.budget = bench.budget;
            spec.mean_curve = mean_curve;
            spec.median_curve = median_curve;
            spec.diag = diag;
            const std::uint64_t job_seed = derive_seed(
                derive_seed(derive_seed(bench.seed, static_cast<std::uint64_t>(inst)),
                            static_cast<std::uint64_t>(mi)),
                static_cast<std::uint64_t>(p));
            OptResult opt = optimize_instance(std::move(spec), bench.methods[mi], job_seed);
            const double energy =
                is_maxcut ? -opt.best_value : opt.best_value;  // undo the sign flip
            rec.ratio = is_maxcut
                            ? maxcut_ratio(energy + model.offset, ext.e_max + model.offset)
                            : approximation_ratio(energy, ext.e_min, ext.e_max);
            rec.best_params = std::move(opt.best_params);
            rec.evaluations_used = opt.evaluations_used;
          } catch (const std::exception& e) {
            rec.error = e.what();
            rec.ratio = std::numeric_limits<double>::quiet_NaN();
          }
          run.wall_times[row] =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
      }
    }
  };

  const int threads = std::min(cfg.threads, bench.count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return run;
}

// ---- summaries -------------------------------------------------------------

struct SummaryRow {
  std::string problem_class;
  std::string method;
  int p = 0;
  int count = 0;  // successful records only
  double ratio_mean = 0.0, ratio_median = 0.0, ratio_std = 0.0;
  std::vector<double> mean_params;
};

// Aggregates keyed by (problem class, method, p). Records are re-sorted by
// instance id within each key before any floating-point accumulation, so a
// shuffled input yields a bit-identical summary.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  std::map<std::tuple<std::string, std::string, int>, std::vector<const ResultRecord*>> groups;
  for (const ResultRecord& r : records)
    if (r.error.empty()) groups[{r.problem_class, r.method, r.p}].push_back(&r);

  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (auto& [key, recs] : groups) {
    std::sort(recs.begin(), recs.end(), [](const ResultRecord* a, const ResultRecord* b) {
      return a->instance_id < b->instance_id;
    });
    SummaryRow row;
    row.problem_class = std::get<0>(key);
    row.method = std::get<1>(key);
    row.p = std::get<2>(key);
    row.count = static_cast<int>(recs.size());

    std::vector<double> ratios;
    ratios.reserve(recs.size());
    for (const ResultRecord* r : recs) ratios.push_back(r->ratio);
    double sum = 0.0;
    for (double v : ratios) sum += v;
    row.ratio_mean = sum / static_cast<double>(ratios.size());
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    row.ratio_median =
        sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    double ss = 0.0;
    for (double v : ratios) ss += (v - row.ratio_mean) * (v - row.ratio_mean);
    row.ratio_std = std::sqrt(ss / static_cast<double>(ratios.size()));  // population std

    const std::size_t dpar = recs.front()->best_params.size();
    bool uniform_dim = true;
    for (const ResultRecord* r : recs)
      if (r->best_params.size() != dpar) uniform_dim = false;
    if (uniform_dim && dpar > 0) {
      row.mean_params.assign(dpar, 0.0);
      for (const ResultRecord* r : recs)
        for (std::size_t i = 0; i < dpar; ++i) row.mean_params[i] += r->best_params[i];
      for (double& v : row.mean_params) v /= static_cast<double>(recs.size());
    }
    rows.push_back(std::move(row));
  }
  return rows;  // std::map iteration gives the stable (class, method, p) order
}

struct RatioDiffRow {
  std::string problem_class;
  std::string method;  // the heuristic variant being compared against vanilla
  int p = 0;
  double diff = 0.0;
  bool valid = false;  // false when either side has no data at this (class, p)
};

inline std::vector<RatioDiffRow> ratio_difference(const std::vector<ResultRecord>& records) {
  const std::vector<SummaryRow> summary = summarize(records);
  std::map<std::pair<std::string, int>, double> vanilla;
  for (const SummaryRow& row : summary)
    if (row.method == "vanilla_qaoa") vanilla[{row.problem_class, row.p}] = row.ratio_mean;

  std::vector<RatioDiffRow> out;
  for (const SummaryRow& row : summary) {
    if (row.method == "vanilla_qaoa") continue;
    RatioDiffRow d;
    d.problem_class = row.problem_class;
    d.method = row.method;
    d.p = row.p;
    const auto it = vanilla.find({row.problem_class, row.p});
    if (it != vanilla.end()) {
      d.diff = row.ratio_mean - it->second;
      d.valid = true;
    }
    out.push_back(std::move(d));
  }
  return out;
}

// ---- CSV / manifest export -------------------------------------------------

inline std::string records_csv(const std::vector<ResultRecord>& records) {
  std::string out = "problem_class,instance_id,method,p,ratio,best_params,evaluations_used,error\n";
  for (const ResultRecord& r : records) {
    out += r.problem_class + "," + std::to_string(r.instance_id) + "," + r.method + "," +
           std::to_string(r.p) + ",";
    out += r.error.empty() ? fmt_double(r.ratio) : "";
    out += "," + join_doubles(r.best_params) + "," + std::to_string(r.evaluations_used) + ",";
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += err + "\n";
  }
  return out;
}

inline std::string timings_csv(const BenchmarkRun& run) {
  std::string out = "problem_class,instance_id,method,p,wall_time_s\n";
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const ResultRecord& r = run.records[i];
    out += r.problem_class + "," + std::to_string(r.instance_id) + "," + r.method + "," +
           std::to_string(r.p) + "," + fmt_double(run.wall_times[i]) + "\n";
  }
  return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out =
      "problem_class,method,p,count,ratio_mean,ratio_median,ratio_std,mean_params\n";
  for (const SummaryRow& r : rows)
    out += r.problem_class + "," + r.method + "," + std::to_string(r.p) + "," +
           std::to_string(r.count) + "," + fmt_double(r.ratio_mean) + "," +
           fmt_double(r.ratio_median) + "," + fmt_double(r.ratio_std) + "," +
           join_doubles(r.mean_params) + "\n";
  return out;
}

inline std::string ratio_diff_csv(const std::vector<RatioDiffRow>& rows) {
  std::string out = "problem_class,method,p,ratio_diff\n";
  for (const RatioDiffRow& r : rows)
    out += r.problem_class + "," + r.method + "," + std::to_string(r.p) + "," +
           (r.valid ? fmt_double(r.diff) : std::string("missing")) + "\n";
  return out;
}

// Manifest: software version, config hash, and content hashes of the input
// files the run consumed — enough to regenerate any figure from the CSVs.
inline nlohmann::json make_manifest(const std::string& config_raw,
                                    const std::map<std::string, std::string>& input_hashes) {
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [name, hash] : input_hashes) inputs[name] = hash;
  return nlohmann::json{
      {"version", kVersion}, {"config_sha256", sha256_hex(config_raw)}, {"inputs", inputs}};
}

inline void write_benchmark_outputs(const BenchmarkRun& run, const std::string& config_raw,
                                    const std::map<std::string, std::string>& input_hashes,
                                    const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  write_text_file(outdir / "records.csv", records_csv(run.records));
  write_text_file(outdir / "timings.csv", timings_csv(run));
  write_text_file(outdir / "summary.csv", summary_csv(summarize(run.records)));
  write_text_file(outdir / "ratio_diff.csv", ratio_diff_csv(ratio_difference(run.records)));
  write_text_file(outdir / "manifest.json",
                  make_manifest(config_raw, input_hashes).dump(2) + "\n");
}

}  // namespace gapsched
