#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gapsched/errors.hpp"
#include "gapsched/rng.hpp"

// Bit-order convention, fixed project-wide: bit i of a basis index is qubit i,
// and a cleared bit maps to spin z = +1 (set bit -> z = -1).

namespace gapsched {

// Exhaustive scans over 2^n bitstrings stay under a few seconds up to here.
inline constexpr int kBruteForceCap = 24;

inline int spin_of_bit(std::uint64_t x, int i) {
  return (x >> i) & 1ULL ? -1 : +1;
}

struct QuboTerm {
  int i = 0, j = 0;  // i <= j
  double value = 0.0;
};

// Upper-triangular QUBO coefficient map. bounds_hint records the sampling
// range the coefficients were drawn from; the rescaling rule needs it.
struct QuboInstance {
  int n = 0;
  std::vector<QuboTerm> coeffs;  // sorted by (i, j), keys unique
  std::optional<std::pair<double, double>> bounds_hint;

  // canonical key order for hand-assembled instances; validate() still
  // rejects out-of-range or duplicate keys
  void normalize() {
    for (auto& t : coeffs)
      if (t.i > t.j) std::swap(t.i, t.j);
    std::sort(coeffs.begin(), coeffs.end(),
              [](const QuboTerm& a, const QuboTerm& b) {
                return a.i != b.i ? a.i < b.i : a.j < b.j;
              });
  }

  void validate() const {
    if (n < 1) throw std::invalid_argument("QuboInstance: n must be >= 1");
    int pi = -1, pj = -1;
    for (const auto& t : coeffs) {
      if (t.i < 0 || t.i > t.j || t.j >= n)
        throw std::invalid_argument("QuboInstance: key out of range, need 0 <= i <= j < n");
      if (t.i < pi || (t.i == pi && t.j <= pj))
        throw std::invalid_argument("QuboInstance: keys must be sorted and unique");
      if (bounds_hint &&
          (t.value < bounds_hint->first || t.value > bounds_hint->second))
        throw std::invalid_argument("QuboInstance: coefficient outside bounds_hint");
      pi = t.i;
      pj = t.j;
    }
  }
};

struct Coupling {
  int i = 0, j = 0;  // i < j
  double value = 0.0;
};

// Diagonal problem Hamiltonian H1 = sum_i h_i z_i + sum_{i<j} J_ij z_i z_j.
// The constant offset is kept out of the spectrum but makes QUBO objective
// values (and MaxCut cut values) exactly recoverable.
struct IsingModel {
  int n = 0;
  std::vector<double> h;
  std::vector<Coupling> couplings;  // sorted by (i, j)
  double offset = 0.0;
  int sign = +1;  // +1: minimize the energy; -1: the harness minimizes -E (MaxCut)

  void validate() const {
    if (n < 1) throw std::invalid_argument("IsingModel: n must be >= 1");
    if (static_cast<int>(h.size()) != n)
      throw std::invalid_argument("IsingModel: h must have n entries");
    if (sign != 1 && sign != -1)
      throw std::invalid_argument("IsingModel: sign must be +1 or -1");
    for (const auto& c : couplings) {
      if (c.i < 0 || c.i >= c.j || c.j >= n)
        throw std::invalid_argument("IsingModel: coupling keys need 0 <= i < j < n");
      if (!std::isfinite(c.value))
        throw std::invalid_argument("IsingModel: non-finite coupling");
    }
  }

  double spin_energy(std::uint64_t x) const {
    double e = 0.0;
    for (int i = 0; i < n; ++i) e += h[i] * spin_of_bit(x, i);
    for (const auto& c : couplings)
      e += c.value * spin_of_bit(x, c.i) * spin_of_bit(x, c.j);
    return e;
  }
};

struct Edge {
  int u = 0, v = 0;  // u < v
  double w = 1.0;
};

struct GraphInstance {
  int n = 0;
  std::vector<Edge> edges;  // sorted by (u, v), no duplicates, no self-loops

  void normalize() {
    for (auto& e : edges)
      if (e.u > e.v) std::swap(e.u, e.v);
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
  }

  void validate() const {
    if (n < 1) throw std::invalid_argument("GraphInstance: n must be >= 1");
    int pu = -1, pv = -1;
    for (const auto& e : edges) {
      if (e.u < 0 || e.u >= e.v || e.v >= n)
        throw std::invalid_argument("GraphInstance: edge keys need 0 <= u < v < n");
      if (e.u < pu || (e.u == pu && e.v <= pv))
        throw std::invalid_argument("GraphInstance: edges must be sorted and unique");
      if (e.w < 0.0) throw std::invalid_argument("GraphInstance: negative weight");
      pu = e.u;
      pv = e.v;
    }
  }
};

// f_Q(x) = sum_i Q_ii x_i + sum_{i<j} Q_ij x_i x_j with x_i = bit i of x.
inline double qubo_value(const QuboInstance& q, std::uint64_t x) {
  double f = 0.0;
  for (const auto& t : q.coeffs) {
    const double xi = (x >> t.i) & 1ULL ? 1.0 : 0.0;
    const double xj = (x >> t.j) & 1ULL ? 1.0 : 0.0;
    f += t.value * xi * xj;  // i == j gives Q_ii x_i since x_i^2 = x_i
  }
  return f;
}

// All Q_ij with i <= j drawn i.i.d. uniform on [lo, hi], row-major order.
// lo == hi is the degenerate range: every coefficient equals lo.
inline QuboInstance gen_random_qubo(int n, double lo, double hi, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_random_qubo: n must be >= 1");
  if (!(lo <= hi)) throw std::invalid_argument("gen_random_qubo: need lo <= hi");
  QuboInstance q;
  q.n = n;
  q.bounds_hint = {lo, hi};
  q.coeffs.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  Rng rng(seed);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      q.coeffs.push_back({i, j, rng.uniform(lo, hi)});
  return q;
}

// Simple d-regular graph via the pairing (configuration) model: shuffle n*d
// stubs, pair them up, reject pairings with self-loops or multi-edges.
inline GraphInstance gen_regular_graph(int n, int d,
                                       std::optional<std::pair<double, double>> weight_range,
                                       std::uint64_t seed,
                                       int max_retries = 1000) {
  if (n < 1 || d < 0) throw std::invalid_argument("gen_regular_graph: bad n or d");
  if (d >= n) throw std::invalid_argument("gen_regular_graph: need d < n");
  if ((static_cast<long long>(n) * d) % 2 != 0)
    throw std::invalid_argument("gen_regular_graph: n*d must be even");
  if (weight_range && weight_range->first > weight_range->second)
    throw std::invalid_argument("gen_regular_graph: bad weight range");

  Rng rng(seed);
  std::vector<int> stubs(static_cast<std::size_t>(n) * d);
  for (int v = 0; v < n; ++v)
    for (int k = 0; k < d; ++k) stubs[static_cast<std::size_t>(v) * d + k] = v;

  for (int attempt = 0; attempt < max_retries; ++attempt) {
    std::vector<int> s = stubs;
    rng.shuffle(s);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(s.size() / 2);
    bool ok = true;
    for (std::size_t k = 0; k + 1 < s.size(); k += 2) {
      int u = s[k], v = s[k + 1];
      if (u == v) {
        ok = false;
        break;
      }
      if (u > v) std::swap(u, v);
      pairs.emplace_back(u, v);
    }
    if (!ok) continue;
    std::sort(pairs.begin(), pairs.end());
    if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end()) continue;

    GraphInstance g;
    g.n = n;
    g.edges.reserve(pairs.size());
    for (const auto& [u, v] : pairs) {
      double w = 1.0;
      if (weight_range) w = rng.uniform(weight_range->first, weight_range->second);
      g.edges.push_back({u, v, w});
    }
    g.validate();
    return g;
  }
  throw std::runtime_error("gen_regular_graph: pairing model exhausted " +
                           std::to_string(max_retries) + " retries");
}

// Eq.-style spin mapping x_i = (1 - z_i)/2. Q_ji (j < i) terms fold into h_i
// symmetrically so that f_Q(x) = energy(z(x)) + offset holds exactly.
inline IsingModel qubo_to_ising(const QuboInstance& q) {
  q.validate();
  IsingModel m;
  m.n = q.n;
  m.h.assign(q.n, 0.0);
  m.sign = +1;
  for (const auto& t : q.coeffs) {
    if (t.i == t.j) {
      m.h[t.i] -= t.value / 2.0;
      m.offset += t.value / 2.0;
    } else {
      m.h[t.i] -= t.value / 4.0;
      m.h[t.j] -= t.value / 4.0;
      m.offset += t.value / 4.0;
      if (t.value != 0.0) m.couplings.push_back({t.i, t.j, t.value / 4.0});
    }
  }
  return m;
}

// Cut value C(x) = sum w_ij (x_i xor x_j) = energy(z(x)) + offset with
// J_ij = -w_ij/2 and offset = sum w_ij / 2. sign = -1: maximize the energy.
inline IsingModel maxcut_to_ising(const GraphInstance& g) {
  g.validate();
  IsingModel m;
  m.n = g.n;
  m.h.assign(g.n, 0.0);
  m.sign = -1;
  m.couplings.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    if (e.w < 0.0) throw std::invalid_argument("maxcut_to_ising: negative weight");
    m.couplings.push_back({e.u, e.v, -e.w / 2.0});
    m.offset += e.w / 2.0;
  }
  return m;
}

// alpha = 2 / (q_max - q_min) brings coefficients drawn in [q_min, q_max]
// onto the scale of the learning ensemble ([-1, 1] sampling).
inline IsingModel rescale_ising(const IsingModel& m, double q_min, double q_max) {
  if (!(q_max > q_min))
    throw std::invalid_argument("rescale_ising: need q_max > q_min");
  const double alpha = 2.0 / (q_max - q_min);
  IsingModel r = m;
  for (double& hi : r.h) hi *= alpha;
  for (auto& c : r.couplings) c.value *= alpha;
  r.offset *= alpha;
  return r;
}

// Diagonal of H1 over all 2^n basis states, offset excluded.
inline std::vector<double> diagonal_energies(const IsingModel& m,
                                             int cap = kBruteForceCap) {
  m.validate();
  if (m.n > cap)
    throw CapExceeded("diagonal_energies: n = " + std::to_string(m.n) +
                      " exceeds cap " + std::to_string(cap));
  const std::uint64_t dim = 1ULL << m.n;
  std::vector<double> energies(dim);
  for (std::uint64_t x = 0; x < dim; ++x) {
    double e = 0.0;
    for (int i = 0; i < m.n; ++i) e += m.h[i] * spin_of_bit(x, i);
    for (const auto& c : m.couplings)
      e += c.value * spin_of_bit(x, c.i) * spin_of_bit(x, c.j);
    energies[x] = e;
  }
  return energies;
}

struct Extrema {
  double e_min = 0.0;
  double e_max = 0.0;
  std::vector<std::uint64_t> argmin;  // every minimizing bitstring
};

inline Extrema brute_force_extrema(const IsingModel& m, int cap = kBruteForceCap) {
  const std::vector<double> energies = diagonal_energies(m, cap);
  Extrema ext;
  ext.e_min = energies[0];
  ext.e_max = energies[0];
  for (double e : energies) {
    ext.e_min = std::min(ext.e_min, e);
    ext.e_max = std::max(ext.e_max, e);
  }
  for (std::uint64_t x = 0; x < energies.size(); ++x)
    if (energies[x] == ext.e_min) ext.argmin.push_back(x);
  return ext;
}

}  // namespace gapsched
