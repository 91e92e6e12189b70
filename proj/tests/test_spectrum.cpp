#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "gapsched/problems.hpp"
#include "gapsched/rng.hpp"
#include "gapsched/spectrum.hpp"

using namespace gapsched;

namespace {

IsingModel zero_model(int n) {
  IsingModel m;
  m.n = n;
  m.h.assign(static_cast<std::size_t>(n), 0.0);
  return m;
}

IsingModel random_model(int n, std::uint64_t seed) {
  return qubo_to_ising(gen_random_qubo(n, -1.0, 1.0, seed));
}

}  // namespace

TEST_CASE("driver spectrum at s = 0 is independent of the problem", "[spectrum]") {
  // H(0) = -sum_i sigma^x_i has eigenvalues -n + 2k; the gap is exactly 2
  for (int n : {2, 3, 5}) {
    for (std::uint64_t seed : {11ULL, 12ULL}) {
      const IsingModel m = random_model(n, seed);
      auto [e0, e1] = two_lowest_eigenvalues(m, 0.0);
      REQUIRE(std::abs(e0 - static_cast<double>(-n)) < 1e-12);
      REQUIRE(std::abs(e1 - static_cast<double>(-n + 2)) < 1e-12);
      REQUIRE(std::abs(gap_at(m, 0.0) - 2.0) < 1e-12);
    }
  }
}

TEST_CASE("single qubit interpolation matches the closed form", "[spectrum]") {
  // H(s) = [[-s, -(1-s)], [-(1-s), s]] for h = (-1): gap 2 sqrt(s^2 + (1-s)^2)
  IsingModel m = zero_model(1);
  m.h[0] = -1.0;
  for (double s : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const double expect = 2.0 * std::sqrt(s * s + (1.0 - s) * (1.0 - s));
    REQUIRE(std::abs(gap_at(m, s) - expect) < 1e-12);
  }
  auto [e0, e1] = two_lowest_eigenvalues(m, 1.0);
  REQUIRE(std::abs(e0 - (-1.0)) < 1e-12);
  REQUIRE(std::abs(e1 - 1.0) < 1e-12);
}

TEST_CASE("zero problem hamiltonian gives a linear gap", "[spectrum]") {
  const IsingModel m = zero_model(3);
  for (double s : {0.0, 0.25, 0.5, 0.75}) {
    REQUIRE(std::abs(gap_at(m, s) - 2.0 * (1.0 - s)) < 1e-12);
  }
  // fully degenerate at s = 1: the gap is zero, not an error
  REQUIRE(std::abs(gap_at(m, 1.0)) < 1e-12);
}

TEST_CASE("degenerate ground space yields zero final gap", "[spectrum]") {
  // J_01 = 1: energies (+1, -1, -1, +1) over x = 00, 01, 10, 11
  IsingModel m = zero_model(2);
  m.couplings.push_back({0, 1, 1.0});
  auto [e0, e1] = two_lowest_eigenvalues(m, 1.0);
  REQUIRE(std::abs(e0 - (-1.0)) < 1e-12);
  REQUIRE(std::abs(e1 - (-1.0)) < 1e-12);
  REQUIRE(std::abs(gap_at(m, 1.0)) < 1e-12);
}

TEST_CASE("final gap equals the diagonal spectral gap", "[spectrum]") {
  for (std::uint64_t seed : {31ULL, 32ULL, 33ULL}) {
    const IsingModel m = random_model(5, seed);
    std::vector<double> e = diagonal_energies(m);
    std::sort(e.begin(), e.end());
    // first strictly larger level above the diagonal minimum
    double e1 = e.back();
    for (double v : e)
      if (v > e.front() + 1e-12) {
        e1 = v;
        break;
      }
    REQUIRE(std::abs(gap_at(m, 1.0) - (e1 - e.front())) < 1e-9);
  }
}

TEST_CASE("interpolating hamiltonian matvec matches its dense form", "[spectrum]") {
  const IsingModel m = random_model(5, 77);
  const InterpolatingHamiltonian h(m, 0.37);
  Rng rng(5);
  Eigen::VectorXd v(static_cast<Eigen::Index>(h.dim()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd out(v.size());
  h.apply(v.data(), out.data());
  const Eigen::VectorXd ref = h.dense() * v;
  REQUIRE((out - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dense matrix is symmetric with the expected sparsity", "[spectrum]") {
  const IsingModel m = random_model(4, 21);
  const InterpolatingHamiltonian h(m, 0.6);
  const Eigen::MatrixXd mat = h.dense();
  REQUIRE((mat - mat.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index x = 0; x < mat.rows(); ++x) {
    for (Eigen::Index y = 0; y < mat.cols(); ++y) {
      if (x == y) continue;
      const int dist = __builtin_popcountll(static_cast<std::uint64_t>(x) ^
                                            static_cast<std::uint64_t>(y));
      if (dist == 1) {
        REQUIRE(mat(x, y) == -(1.0 - 0.6));
      } else {
        REQUIRE(mat(x, y) == 0.0);
      }
    }
  }
}

TEST_CASE("scale bound dominates the spectral radius", "[spectrum]") {
  const IsingModel m = random_model(5, 91);
  for (double s : {0.0, 0.3, 0.7, 1.0}) {
    const InterpolatingHamiltonian h(m, s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense(), Eigen::EigenvaluesOnly);
    const double radius =
        std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(es.eigenvalues().size() - 1)));
    REQUIRE(radius <= h.scale_bound() + 1e-12);
  }
}

TEST_CASE("model offset never enters the spectrum", "[spectrum]") {
  IsingModel a = random_model(4, 55);
  IsingModel b = a;
  b.offset += 123.0;
  for (double s : {0.0, 0.4, 1.0}) {
    REQUIRE(gap_at(a, s) == gap_at(b, s));
  }
}

TEST_CASE("gap is invariant under qubit relabeling", "[spectrum]") {
  IsingModel a = zero_model(3);
  a.h = {0.3, -0.7, 0.2};
  a.couplings = {{0, 1, 0.5}, {1, 2, -0.4}};
  // swap qubits 0 and 2
  IsingModel b = zero_model(3);
  b.h = {0.2, -0.7, 0.3};
  b.couplings = {{0, 1, -0.4}, {1, 2, 0.5}};
  for (double s : {0.1, 0.5, 0.9}) {
    REQUIRE(std::abs(gap_at(a, s) - gap_at(b, s)) < 1e-10);
  }
}

TEST_CASE("two lowest eigenvalues agree with a full dense solve", "[spectrum]") {
  const IsingModel m = random_model(6, 13);
  for (double s : {0.15, 0.5, 0.85}) {
    const InterpolatingHamiltonian h(m, s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense(), Eigen::EigenvaluesOnly);
    auto [e0, e1] = two_lowest_eigenvalues(m, s);
    REQUIRE(std::abs(e0 - es.eigenvalues()(0)) < 1e-12);
    REQUIRE(std::abs(e1 - es.eigenvalues()(1)) < 1e-12);
  }
}

TEST_CASE("iterative path reproduces the dense path", "[spectrum][lanczos]") {
  EigsOptions dense_opts;
  dense_opts.method = EigsMethod::dense;
  EigsOptions lanczos_opts;
  lanczos_opts.method = EigsMethod::lanczos;
  const IsingModel m = random_model(6, 29);
  for (int j = 0; j <= 10; ++j) {
    const double s = static_cast<double>(j) / 10.0;
    auto [d0, d1] = two_lowest_eigenvalues(m, s, dense_opts);
    auto [l0, l1] = two_lowest_eigenvalues(m, s, lanczos_opts);
    REQUIRE(std::abs(l0 - d0) < 1e-8);
    REQUIRE(std::abs(l1 - d1) < 1e-8);
  }
}

TEST_CASE("iterative path is exact on tiny spaces", "[spectrum][lanczos]") {
  EigsOptions opts;
  opts.method = EigsMethod::lanczos;
  IsingModel m = zero_model(2);
  m.couplings.push_back({0, 1, 1.0});
  for (double s : {0.5, 1.0}) {
    EigsOptions dense_opts;
    dense_opts.method = EigsMethod::dense;
    auto [d0, d1] = two_lowest_eigenvalues(m, s, dense_opts);
    auto [l0, l1] = two_lowest_eigenvalues(m, s, opts);
    REQUIRE(std::abs(l0 - d0) < 1e-12);
    REQUIRE(std::abs(l1 - d1) < 1e-12);
  }
}

TEST_CASE("iterative path reports exhaustion honestly", "[spectrum][lanczos]") {
  EigsOptions opts;
  opts.method = EigsMethod::lanczos;
  opts.max_basis = 8;  // far too small for a 64-dimensional space
  const IsingModel m = random_model(6, 47);
  REQUIRE_THROWS_AS(two_lowest_eigenvalues(m, 0.4, opts), EigensolverDidNotConverge);
}

TEST_CASE("diagonalization cap is enforced", "[spectrum]") {
  const IsingModel m = zero_model(kDiagonalizationCap + 1);
  REQUIRE_THROWS_AS(two_lowest_eigenvalues(m, 0.5), CapExceeded);
  REQUIRE_THROWS_AS(gap_profile(m, uniform_grid(3)), CapExceeded);
}

TEST_CASE("uniform grid spans the unit interval evenly", "[spectrum]") {
  const std::vector<double> g = uniform_grid(101);
  REQUIRE(g.size() == 101);
  REQUIRE(g.front() == 0.0);
  REQUIRE(g.back() == 1.0);
  for (std::size_t j = 1; j < g.size(); ++j) {
    REQUIRE(std::abs((g[j] - g[j - 1]) - 0.01) < 1e-15);
  }
  REQUIRE(uniform_grid(2) == std::vector<double>{0.0, 1.0});
  REQUIRE_THROWS_AS(uniform_grid(1), std::invalid_argument);
}

TEST_CASE("gap profile evaluates the gap on the requested grid", "[spectrum]") {
  const IsingModel m = random_model(4, 101);
  const std::vector<double> grid = uniform_grid(5);
  const GapProfile p = gap_profile(m, grid);
  REQUIRE(p.grid == grid);
  REQUIRE(p.gaps.size() == grid.size());
  REQUIRE(p.meta.n == 4);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    REQUIRE(p.gaps[j] == gap_at(m, grid[j]));
  }
  // two-point grids are the degenerate but legal minimum
  const GapProfile p2 = gap_profile(m, {0.0, 1.0});
  REQUIRE(p2.gaps.size() == 2);
  REQUIRE(std::abs(p2.gaps.front() - 2.0) < 1e-12);
}

TEST_CASE("gap profile validation rejects malformed data", "[spectrum]") {
  GapProfile p;
  p.grid = {0.0, 0.5, 1.0};
  p.gaps = {1.0, 1.0};
  REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);  // length mismatch
  p.gaps = {1.0, 1.0, 1.0};
  p.validate();
  p.grid = {0.0, 0.5, 0.9};
  REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);  // does not reach 1
  p.grid = {0.0, 0.6, 0.5};
  REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);  // not increasing
  p.grid = {0.0, 0.5, 1.0};
  p.gaps = {1.0, -0.5, 1.0};
  REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);  // negative gap
}

TEST_CASE("single instance ensemble equals a direct profile", "[spectrum]") {
  EnsembleSpec spec;
  spec.n = 4;
  spec.lo = -1.0;
  spec.hi = 1.0;
  spec.count = 1;
  spec.seed_base = 99;
  const std::vector<double> grid = uniform_grid(11);
  const std::vector<GapProfile> profiles = sample_ensemble_gaps(spec, grid);
  REQUIRE(profiles.size() == 1);

  const QuboInstance q = gen_random_qubo(4, -1.0, 1.0, derive_seed(99, 0));
  const GapProfile direct = gap_profile(qubo_to_ising(q), grid);
  REQUIRE(profiles[0].gaps == direct.gaps);
  REQUIRE(profiles[0].meta.lo == -1.0);
  REQUIRE(profiles[0].meta.hi == 1.0);
  REQUIRE(profiles[0].meta.kind == Aggregation::raw);
}

TEST_CASE("ensemble sampling is independent of the thread count", "[spectrum]") {
  EnsembleSpec spec;
  spec.n = 4;
  spec.count = 6;
  spec.seed_base = 5;
  const std::vector<double> grid = uniform_grid(7);
  const std::vector<GapProfile> serial = sample_ensemble_gaps(spec, grid, {}, 1);
  const std::vector<GapProfile> parallel = sample_ensemble_gaps(spec, grid, {}, 3);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    REQUIRE(serial[i].gaps == parallel[i].gaps);
  }
}

TEST_CASE("mean aggregation averages pointwise", "[spectrum]") {
  GapProfile a;
  a.grid = {0.0, 0.5, 1.0};
  a.gaps = {2.0, 1.0, 0.5};
  a.meta.n = 4;
  GapProfile b = a;
  for (double& g : b.gaps) g *= 3.0;  // {6, 3, 1.5}
  const GapProfile mean = aggregate_profiles({a, b}, Aggregation::mean);
  REQUIRE(mean.gaps == std::vector<double>{4.0, 2.0, 1.0});
  REQUIRE(mean.meta.count == 2);
  REQUIRE(mean.meta.kind == Aggregation::mean);
}

TEST_CASE("median aggregation is robust to one outlier", "[spectrum]") {
  GapProfile a;
  a.grid = {0.0, 0.5, 1.0};
  a.gaps = {2.0, 1.0, 0.5};
  GapProfile outlier = a;
  for (double& g : outlier.gaps) g *= 3.0;
  const GapProfile median = aggregate_profiles({a, a, outlier}, Aggregation::median);
  REQUIRE(median.gaps == a.gaps);
  // even count: midpoint of the two central values
  const GapProfile mid = aggregate_profiles({a, outlier}, Aggregation::median);
  REQUIRE(mid.gaps == std::vector<double>{4.0, 2.0, 1.0});
}

TEST_CASE("aggregation rejects unusable inputs", "[spectrum]") {
  GapProfile a;
  a.grid = {0.0, 1.0};
  a.gaps = {2.0, 1.0};
  REQUIRE_THROWS_AS(aggregate_profiles({}, Aggregation::mean), std::invalid_argument);
  REQUIRE_THROWS_AS(aggregate_profiles({a}, Aggregation::raw), std::invalid_argument);
  GapProfile b;
  b.grid = {0.0, 0.5, 1.0};
  b.gaps = {2.0, 1.5, 1.0};
  REQUIRE_THROWS_AS(aggregate_profiles({a, b}, Aggregation::mean), std::invalid_argument);
}

TEST_CASE("final gap distribution collects the last grid point", "[spectrum]") {
  GapProfile a;
  a.grid = {0.0, 1.0};
  a.gaps = {2.0, 0.25};
  GapProfile b = a;
  b.gaps.back() = 0.75;
  const std::vector<double> fin = final_gap_distribution({a, b});
  REQUIRE(fin == std::vector<double>{0.25, 0.75});
}
