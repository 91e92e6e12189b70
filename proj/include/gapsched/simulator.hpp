#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapsched/errors.hpp"
#include "gapsched/problems.hpp"
#include "gapsched/rng.hpp"
#include "gapsched/schedule.hpp"
#include "gapsched/spectrum.hpp"

namespace gapsched {

inline constexpr int kSimulationCap = 24;
inline constexpr int kOdeCap = 12;

using Amp = std::complex<double>;

struct StateVector {
  int n = 0;
  std::vector<Amp> amps;  // 2^n amplitudes, basis index bit i = qubit i

  double norm_sq() const {
    double s = 0.0;
    for (const Amp& a : amps) s += std::norm(a);
    return s;
  }
};

inline StateVector init_plus(int n, int cap = kSimulationCap) {
  if (n < 1) throw std::invalid_argument("init_plus: n must be >= 1");
  if (n > cap)
    throw CapExceeded("init_plus: n = " + std::to_string(n) + " exceeds simulation cap " +
                      std::to_string(cap));
  StateVector psi;
  psi.n = n;
  const std::size_t dim = std::size_t{1} << n;
  psi.amps.assign(dim, Amp(std::pow(2.0, -0.5 * n), 0.0));
  return psi;
}

// exp(+i beta sigma^x) on every qubit, i.e. RX(-2 beta) per qubit:
// [[cos b, i sin b], [i sin b, cos b]].
inline void apply_mixer(StateVector& psi, double beta) {
  const double c = std::cos(beta);
  const Amp is(0.0, std::sin(beta));
  const std::size_t dim = psi.amps.size();
  for (int qubit = 0; qubit < psi.n; ++qubit) {
    const std::size_t mask = std::size_t{1} << qubit;
    for (std::size_t x = 0; x < dim; ++x) {
      if (x & mask) continue;
      const std::size_t y = x | mask;
      const Amp a0 = psi.amps[x];
      const Amp a1 = psi.amps[y];
      psi.amps[x] = c * a0 + is * a1;
      psi.amps[y] = is * a0 + c * a1;
    }
  }
}

// Diagonal phase pass: amp_x *= exp(-i gamma E(x)) with E = diagonal_energies
// (offset excluded). Gate-exact: H1 is diagonal, so the R_Z / R_ZZ product
// composes to exactly this phase.
inline void apply_cost(StateVector& psi, double gamma, const std::vector<double>& diag) {
  if (diag.size() != psi.amps.size())
    throw std::invalid_argument("apply_cost: dimension mismatch");
  for (std::size_t x = 0; x < diag.size(); ++x)
    psi.amps[x] *= std::polar(1.0, -gamma * diag[x]);
}

inline void apply_cost(StateVector& psi, double gamma, const IsingModel& m) {
  if (m.n != psi.n) throw std::invalid_argument("apply_cost: dimension mismatch");
  apply_cost(psi, gamma, diagonal_energies(m, kSimulationCap));
}

// Layers k = 1..p in order; within each layer cost precedes mixer (the Eq-8
// operator product acts right-to-left on the initial state).
inline StateVector run_layered_circuit(const IsingModel& m, const AngleSchedule& schedule,
                                       const std::vector<double>& diag) {
  if (schedule.gammas.size() != static_cast<std::size_t>(schedule.p) ||
      schedule.betas.size() != static_cast<std::size_t>(schedule.p))
    throw std::invalid_argument("run_layered_circuit: angle sequences must have length p");
  StateVector psi = init_plus(m.n);
  if (diag.size() != psi.amps.size())
    throw std::invalid_argument("run_layered_circuit: dimension mismatch");
  for (int k = 0; k < schedule.p; ++k) {
    apply_cost(psi, schedule.gammas[static_cast<std::size_t>(k)], diag);
    apply_mixer(psi, schedule.betas[static_cast<std::size_t>(k)]);
  }
  return psi;
}

inline StateVector run_layered_circuit(const IsingModel& m, const AngleSchedule& schedule) {
  return run_layered_circuit(m, schedule, diagonal_energies(m, kSimulationCap));
}

inline double expectation(const StateVector& psi, const std::vector<double>& diag) {
  if (diag.size() != psi.amps.size())
    throw std::invalid_argument("expectation: dimension mismatch");
  double e = 0.0;
  for (std::size_t x = 0; x < diag.size(); ++x) e += std::norm(psi.amps[x]) * diag[x];
  return e;
}

inline double expectation(const StateVector& psi, const IsingModel& m) {
  if (m.n != psi.n) throw std::invalid_argument("expectation: dimension mismatch");
  return expectation(psi, diagonal_energies(m, kSimulationCap));
}

// |<a|b>|^2; all cross-method comparisons are phase-insensitive.
inline double fidelity(const StateVector& a, const StateVector& b) {
  if (a.n != b.n) throw std::invalid_argument("fidelity: dimension mismatch");
  Amp overlap(0.0, 0.0);
  for (std::size_t x = 0; x < a.amps.size(); ++x)
    overlap += std::conj(a.amps[x]) * b.amps[x];
  return std::norm(overlap);
}

struct OdeResult {
  StateVector state;
  double norm_drift = 0.0;  // | ||psi||^2 - 1 | before final renormalization
  bool gap_floor_engaged = false;
};

// Integrates i kappa g^q(s) d/ds |psi> = H(s) |psi> from s = 0 to 1, starting
// at |+>^n, with fixed-step RK4. The state is renormalized once at the end;
// the accumulated drift is reported, never hidden.
template <typename GapFn>
  requires std::invocable<GapFn, double>
inline OdeResult ode_evolve(const IsingModel& m, double kappa, double q, GapFn&& gap,
                            int steps = 10000) {
  if (m.n > kOdeCap)
    throw CapExceeded("ode_evolve: n = " + std::to_string(m.n) + " exceeds ODE cap " +
                      std::to_string(kOdeCap));
  if (!(kappa > 0.0)) throw std::invalid_argument("ode_evolve: kappa must be > 0");
  if (!(q >= 0.0)) throw std::invalid_argument("ode_evolve: q must be >= 0");
  if (steps < 1) throw std::invalid_argument("ode_evolve: steps must be >= 1");

  OdeResult out;
  const std::vector<double> diag = diagonal_energies(m, kOdeCap);
  double dmax = 0.0;
  for (double e : diag) dmax = std::max(dmax, std::abs(e));

  const std::size_t dim = std::size_t{1} << m.n;
  out.state = init_plus(m.n);
  std::vector<Amp>& y = out.state.amps;
  std::vector<Amp> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

  const double h = 1.0 / steps;

  // dy/ds = -i H(s) y / (kappa * max(g, eps)^q)
  auto deriv = [&](double s, const std::vector<Amp>& in, std::vector<Amp>& d) {
    double g = gap(s);
    if (g < kGapFloor) {
      g = kGapFloor;
      out.gap_floor_engaged = true;
    }
    const double denom = kappa * std::pow(g, q);
    // per-step rotation angle bound; a fixed-step integrator cannot resolve
    // more than a half turn per step
    const double rate_bound = (s * dmax + (1.0 - s) * m.n) / denom;
    if (h * rate_bound > 3.141592653589793)
      throw std::runtime_error(
          "ode_evolve: step size underflow near gap floor (rotation " +
          std::to_string(h * rate_bound) + " rad per step at s = " + std::to_string(s) + ")");
    const double off = (1.0 - s) / denom;
    const double sd = s / denom;
    const Amp mi(0.0, -1.0);
    for (std::size_t x = 0; x < dim; ++x) d[x] = mi * (sd * diag[x] * in[x]);
    if (off != 0.0) {
      const Amp pi_(0.0, off);  // -i * (-off) = +i*off
      for (int i = 0; i < m.n; ++i) {
        const std::size_t mask = std::size_t{1} << i;
        for (std::size_t x = 0; x < dim; ++x) d[x] += pi_ * in[x ^ mask];
      }
    }
  };

  for (int step = 0; step < steps; ++step) {
    const double s = static_cast<double>(step) * h;
    deriv(s, y, k1);
    for (std::size_t x = 0; x < dim; ++x) tmp[x] = y[x] + 0.5 * h * k1[x];
    deriv(s + 0.5 * h, tmp, k2);
    for (std::size_t x = 0; x < dim; ++x) tmp[x] = y[x] + 0.5 * h * k2[x];
    deriv(s + 0.5 * h, tmp, k3);
    for (std::size_t x = 0; x < dim; ++x) tmp[x] = y[x] + h * k3[x];
    deriv(std::min(s + h, 1.0), tmp, k4);
    for (std::size_t x = 0; x < dim; ++x)
      y[x] += (h / 6.0) * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x]);
  }

  const double nsq = out.state.norm_sq();
  out.norm_drift = std::abs(nsq - 1.0);
  const double inv = 1.0 / std::sqrt(nsq);
  for (Amp& a : y) a *= inv;
  return out;
}

inline OdeResult ode_evolve(const IsingModel& m, double kappa, double q,
                            const BezierGapCurve& curve, int steps = 10000) {
  return ode_evolve(
      m, kappa, q, [&curve](double s) { return eval_curve(curve, s); }, steps);
}

// i.i.d. draws from |amp_x|^2, deterministic per seed. Returned values are
// basis indices under the project bit-order convention.
inline std::vector<std::uint64_t> sample_bitstrings(const StateVector& psi, int shots,
                                                    std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("sample_bitstrings: shots must be >= 1");
  std::vector<double> cdf(psi.amps.size());
  double acc = 0.0;
  for (std::size_t x = 0; x < psi.amps.size(); ++x) {
    acc += std::norm(psi.amps[x]);
    cdf[x] = acc;
  }
  const double total = acc;
  Rng rng(seed);
  std::vector<std::uint64_t> out(static_cast<std::size_t>(shots));
  for (int sdraw = 0; sdraw < shots; ++sdraw) {
    const double u = rng.uniform01() * total;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    out[static_cast<std::size_t>(sdraw)] =
        static_cast<std::uint64_t>(it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin()));
  }
  return out;
}

}  // namespace gapsched
