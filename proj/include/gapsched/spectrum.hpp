#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gapsched/errors.hpp"
#include "gapsched/lanczos.hpp"
#include "gapsched/problems.hpp"
#include "gapsched/rng.hpp"

namespace gapsched {

inline constexpr int kDiagonalizationCap = 14;

// H(s) = (1-s) H0 + s H1 with H0 = -sum_i sigma^x_i and H1 the diagonal Ising
// Hamiltonian. Real symmetric of dimension 2^n: diagonal entry s*E(x),
// off-diagonal -(1-s) exactly between basis states at Hamming distance 1.
struct InterpolatingHamiltonian {
  const IsingModel* model = nullptr;
  double s = 0.0;
  std::shared_ptr<const std::vector<double>> diag;  // cached H1 diagonal, shared across s

  InterpolatingHamiltonian(const IsingModel& m, double s_, int cap = kDiagonalizationCap)
      : model(&m), s(s_) {
    if (!(s >= 0.0 && s <= 1.0))
      throw std::invalid_argument("InterpolatingHamiltonian: s must lie in [0, 1]");
    diag = std::make_shared<const std::vector<double>>(diagonal_energies(m, cap));
  }

  InterpolatingHamiltonian with_s(double s_) const {
    if (!(s_ >= 0.0 && s_ <= 1.0))
      throw std::invalid_argument("InterpolatingHamiltonian: s must lie in [0, 1]");
    InterpolatingHamiltonian h = *this;
    h.s = s_;
    return h;
  }

  int qubits() const { return model->n; }
  std::size_t dim() const { return diag->size(); }

  // out = H(s) * in
  void apply(const double* in, double* out) const {
    const std::size_t d = dim();
    const double* e = diag->data();
    for (std::size_t x = 0; x < d; ++x) out[x] = s * e[x] * in[x];
    const double off = 1.0 - s;
    if (off == 0.0) return;
    for (int i = 0; i < model->n; ++i) {
      const std::size_t mask = std::size_t{1} << i;
      for (std::size_t x = 0; x < d; ++x) out[x] -= off * in[x ^ mask];
    }
  }

  Eigen::MatrixXd dense() const {
    const auto d = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index x = 0; x < d; ++x) {
      m(x, x) = s * (*diag)[static_cast<std::size_t>(x)];
      for (int i = 0; i < model->n; ++i)
        m(x, static_cast<Eigen::Index>(static_cast<std::size_t>(x) ^ (std::size_t{1} << i))) =
            -(1.0 - s);
    }
    return m;
  }

  // Gershgorin-style bound on the spectral radius, used as the solver's scale.
  double scale_bound() const {
    double dmax = 0.0;
    for (double e : *diag) dmax = std::max(dmax, std::abs(e));
    return s * dmax + (1.0 - s) * model->n;
  }
};

enum class EigsMethod { automatic, dense, lanczos };

struct EigsOptions {
  EigsMethod method = EigsMethod::automatic;
  int cap = kDiagonalizationCap;
  int dense_cutoff = 8;  // automatic: dense for n <= cutoff, Lanczos above
  double tol = 1e-10;
  int max_basis = 420;
  std::uint64_t lanczos_seed = 0x1f123bb5159a55e5ULL;
};

namespace detail {

inline std::pair<double, double> two_lowest_of(const InterpolatingHamiltonian& h,
                                               const EigsOptions& opts) {
  const int n = h.qubits();
  if (h.dim() < 2) throw std::invalid_argument("two_lowest_eigenvalues: need dimension >= 2");
  const bool use_dense = opts.method == EigsMethod::dense ||
                         (opts.method == EigsMethod::automatic && n <= opts.dense_cutoff);
  if (use_dense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw EigensolverDidNotConverge("dense eigensolver failed", static_cast<int>(h.dim()));
    return {es.eigenvalues()(0), es.eigenvalues()(1)};
  }
  LanczosOptions lo;
  lo.tol = opts.tol;
  lo.scale = h.scale_bound();
  lo.max_basis = opts.max_basis;
  lo.seed = opts.lanczos_seed;
  auto out = block_lanczos_two_smallest(
      [&h](const double* in, double* o) { h.apply(in, o); }, static_cast<int>(h.dim()), lo);
  return {out.e0, out.e1};
}

}  // namespace detail

inline std::pair<double, double> two_lowest_eigenvalues(const IsingModel& m, double s,
                                                        const EigsOptions& opts = {}) {
  if (m.n > opts.cap)
    throw CapExceeded("two_lowest_eigenvalues: n = " + std::to_string(m.n) +
                      " exceeds diagonalization cap " + std::to_string(opts.cap));
  InterpolatingHamiltonian h(m, s, opts.cap);
  return detail::two_lowest_of(h, opts);
}

inline double gap_at(const IsingModel& m, double s, const EigsOptions& opts = {}) {
  auto [e0, e1] = two_lowest_eigenvalues(m, s, opts);
  return e1 - e0;
}

enum class Aggregation { raw, mean, median };

inline const char* to_string(Aggregation a) {
  switch (a) {
    case Aggregation::raw: return "raw";
    case Aggregation::mean: return "mean";
    case Aggregation::median: return "median";
  }
  return "raw";
}

struct ProfileMeta {
  int n = 0;
  double lo = 0.0, hi = 0.0;  // coefficient range of the ensemble
  int count = 1;              // instances behind this profile
  Aggregation kind = Aggregation::raw;
};

struct GapProfile {
  std::vector<double> grid;  // strictly increasing, grid.front() = 0, grid.back() = 1
  std::vector<double> gaps;  // same length, nonnegative
  ProfileMeta meta;

  void validate() const {
    if (grid.size() != gaps.size())
      throw std::invalid_argument("GapProfile: grid/gaps length mismatch");
    if (grid.size() < 2) throw std::invalid_argument("GapProfile: need at least 2 points");
    if (grid.front() != 0.0 || grid.back() != 1.0)
      throw std::invalid_argument("GapProfile: grid must span [0, 1]");
    for (std::size_t j = 1; j < grid.size(); ++j)
      if (!(grid[j] > grid[j - 1]))
        throw std::invalid_argument("GapProfile: grid must be strictly increasing");
    for (double g : gaps)
      if (!(g >= 0.0)) throw std::invalid_argument("GapProfile: gaps must be nonnegative");
  }
};

inline std::vector<double> uniform_grid(int points = 101) {
  if (points < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
  std::vector<double> s(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) s[static_cast<std::size_t>(j)] = static_cast<double>(j) / (points - 1);
  s.front() = 0.0;
  s.back() = 1.0;
  return s;
}

inline GapProfile gap_profile(const IsingModel& m, const std::vector<double>& grid,
                              const EigsOptions& opts = {}) {
  if (m.n > opts.cap)
    throw CapExceeded("gap_profile: n = " + std::to_string(m.n) +
                      " exceeds diagonalization cap " + std::to_string(opts.cap));
  GapProfile p;
  p.grid = grid;
  p.gaps.resize(grid.size());
  p.meta.n = m.n;
  InterpolatingHamiltonian h(m, 0.0, opts.cap);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    auto [e0, e1] = detail::two_lowest_of(h.with_s(grid[j]), opts);
    p.gaps[j] = e1 - e0;
  }
  p.validate();
  return p;
}

struct EnsembleSpec {
  int n = 10;
  double lo = -1.0, hi = 1.0;
  int count = 1000;
  std::uint64_t seed_base = 0;
};

// One raw gap profile per generated random-QUBO instance. Instance i uses
// derive_seed(seed_base, i), so results are identical for any thread count.
inline std::vector<GapProfile> sample_ensemble_gaps(const EnsembleSpec& spec,
                                                    const std::vector<double>& grid,
                                                    const EigsOptions& opts = {},
                                                    int threads = 1) {
  if (spec.count < 1) throw std::invalid_argument("sample_ensemble_gaps: count must be >= 1");
  if (threads < 1) threads = 1;
  threads = std::min(threads, spec.count);

  std::vector<GapProfile> out(static_cast<std::size_t>(spec.count));
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(spec.count));

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= spec.count) return;
      try {
        QuboInstance q = gen_random_qubo(spec.n, spec.lo, spec.hi, derive_seed(spec.seed_base, i));
        IsingModel m = qubo_to_ising(q);
        GapProfile p = gap_profile(m, grid, opts);
        p.meta.lo = spec.lo;
        p.meta.hi = spec.hi;
        out[static_cast<std::size_t>(i)] = std::move(p);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (int i = 0; i < spec.count; ++i) {
    if (errors[static_cast<std::size_t>(i)]) {
      try {
        std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
      } catch (const std::exception& e) {
        throw std::runtime_error("sample_ensemble_gaps: instance " + std::to_string(i) + ": " +
                                 e.what());
      }
    }
  }
  return out;
}

inline GapProfile aggregate_profiles(const std::vector<GapProfile>& profiles, Aggregation kind) {
  if (profiles.empty()) throw std::invalid_argument("aggregate_profiles: no profiles");
  if (kind == Aggregation::raw)
    throw std::invalid_argument("aggregate_profiles: kind must be mean or median");
  const auto& grid = profiles.front().grid;
  for (const auto& p : profiles)
    if (p.grid != grid) throw std::invalid_argument("aggregate_profiles: mismatched grids");

  GapProfile agg;
  agg.grid = grid;
  agg.gaps.resize(grid.size());
  agg.meta = profiles.front().meta;
  agg.meta.count = static_cast<int>(profiles.size());
  agg.meta.kind = kind;

  std::vector<double> column(profiles.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (std::size_t i = 0; i < profiles.size(); ++i) column[i] = profiles[i].gaps[j];
    if (kind == Aggregation::mean) {
      double sum = 0.0;
      for (double v : column) sum += v;
      agg.gaps[j] = sum / static_cast<double>(column.size());
    } else {
      std::sort(column.begin(), column.end());
      const std::size_t mid = column.size() / 2;
      agg.gaps[j] = column.size() % 2 == 1 ? column[mid] : 0.5 * (column[mid - 1] + column[mid]);
    }
  }
  return agg;
}

inline std::vector<double> final_gap_distribution(const std::vector<GapProfile>& profiles) {
  std::vector<double> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) out.push_back(p.gaps.back());
  return out;
}

}  // namespace gapsched
