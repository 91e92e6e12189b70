#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gapsched/bezier.hpp"
#include "gapsched/errors.hpp"
#include "gapsched/problems.hpp"
#include "gapsched/rng.hpp"
#include "gapsched/schedule.hpp"
#include "gapsched/simulator.hpp"

namespace gapsched {

enum class Direction { minimize_energy, minimize_negated };  // negated = MaxCut

enum class Protocol { heuristic_mean, heuristic_median, vanilla_qaoa };

inline const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::heuristic_mean: return "heuristic_mean";
    case Protocol::heuristic_median: return "heuristic_median";
    case Protocol::vanilla_qaoa: return "vanilla_qaoa";
  }
  return "heuristic_mean";
}

struct ObjectiveSpec {
  IsingModel model;
  int p = 1;
  Direction direction = Direction::minimize_energy;
  int budget = 200;
  BezierGapCurve mean_curve;    // used by Protocol::heuristic_mean
  BezierGapCurve median_curve;  // used by Protocol::heuristic_median
  std::shared_ptr<const std::vector<double>> diag;  // cached diagonal energies

  void validate() const {
    model.validate();
    if (p < 1) throw std::invalid_argument("ObjectiveSpec: p must be >= 1");
    if (budget < 1) throw std::invalid_argument("ObjectiveSpec: budget must be >= 1");
  }

  void prepare() {
    validate();
    if (!diag)
      diag = std::make_shared<const std::vector<double>>(
          diagonal_energies(model, kSimulationCap));
  }
};

namespace detail {

inline std::shared_ptr<const std::vector<double>> diag_of(const ObjectiveSpec& spec) {
  if (spec.diag) return spec.diag;
  return std::make_shared<const std::vector<double>>(
      diagonal_energies(spec.model, kSimulationCap));
}

inline double signed_expectation(const StateVector& psi, const std::vector<double>& diag,
                                 Direction dir) {
  const double e = expectation(psi, diag);
  return dir == Direction::minimize_energy ? e : -e;
}

}  // namespace detail

inline double heuristic_objective(double kappa, double q, const ObjectiveSpec& spec,
                                  const BezierGapCurve& curve) {
  spec.validate();
  const auto diag = detail::diag_of(spec);
  const AngleSchedule sched = derive_angles(spec.p, kappa, q, curve);
  const StateVector psi = run_layered_circuit(spec.model, sched, *diag);
  return detail::signed_expectation(psi, *diag, spec.direction);
}

// angles = (gamma_1..gamma_p, beta_1..beta_p)
inline double qaoa_objective(const std::vector<double>& angles, const ObjectiveSpec& spec) {
  spec.validate();
  if (angles.size() != 2 * static_cast<std::size_t>(spec.p))
    throw std::invalid_argument("qaoa_objective: need exactly 2p angles");
  const auto diag = detail::diag_of(spec);
  AngleSchedule sched = free_schedule(
      std::vector<double>(angles.begin(), angles.begin() + spec.p),
      std::vector<double>(angles.begin() + spec.p, angles.end()));
  const StateVector psi = run_layered_circuit(spec.model, sched, *diag);
  return detail::signed_expectation(psi, *diag, spec.direction);
}

struct TraceEntry {
  int eval_index = 0;
  double value = 0.0;
  std::vector<double> params;
};

struct OptResult {
  std::vector<double> best_params;
  double best_value = 0.0;
  std::vector<TraceEntry> trace;
  int evaluations_used = 0;
  std::string method;
};

using Objective = std::function<double(const std::vector<double>&)>;

// Bounded Nelder-Mead simplex (standard reflection/expansion/contraction/
// shrink coefficients 1, 2, 0.5, 0.5). Candidate points are clipped into the
// box before evaluation; the budget counts objective evaluations exactly and
// the best-seen point is returned, never the last-seen. The seed parameter is
// part of the stable interface; the simplex itself is deterministic.
inline OptResult minimize(const Objective& objective, const std::vector<double>& x0,
                          const std::vector<double>& lo, const std::vector<double>& hi,
                          int budget, std::uint64_t seed = 0) {
  (void)seed;
  const std::size_t d = x0.size();
  if (d == 0) throw std::invalid_argument("minimize: need at least one parameter");
  if (lo.size() != d || hi.size() != d)
    throw std::invalid_argument("minimize: bounds must match parameter count");
  for (std::size_t i = 0; i < d; ++i) {
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("minimize: invalid bounds");
    if (x0[i] < lo[i] || x0[i] > hi[i])
      throw std::invalid_argument("minimize: x0 outside bounds");
  }
  if (budget < 1) throw std::invalid_argument("minimize: budget must be >= 1");

  OptResult res;
  res.best_value = std::numeric_limits<double>::infinity();
  res.trace.reserve(static_cast<std::size_t>(budget));

  auto clip = [&](std::vector<double> x) {
    for (std::size_t i = 0; i < d; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
  };
  auto eval = [&](const std::vector<double>& x) {
    const double v = objective(x);
    if (!std::isfinite(v)) throw NonFiniteObjective(x);
    res.trace.push_back({res.evaluations_used, v, x});
    if (v < res.best_value) {
      res.best_value = v;
      res.best_params = x;
    }
    ++res.evaluations_used;
    return v;
  };
  auto exhausted = [&]() { return res.evaluations_used >= budget; };

  // initial simplex: x0 plus one step of 5% of the box width per dimension
  std::vector<std::vector<double>> vx;
  std::vector<double> vf;
  vx.push_back(clip(x0));
  vf.push_back(eval(vx[0]));
  for (std::size_t i = 0; i < d && !exhausted(); ++i) {
    std::vector<double> v = x0;
    const double step = 0.05 * (hi[i] - lo[i]);
    v[i] = x0[i] + step <= hi[i] ? x0[i] + step : x0[i] - step;
    vx.push_back(clip(std::move(v)));
    vf.push_back(eval(vx.back()));
  }

  std::vector<std::size_t> order(vx.size());
  while (!exhausted() && vx.size() == d + 1) {
    order.resize(vx.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vf[a] < vf[b]; });
    const std::size_t best = order.front(), worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    std::vector<double> centroid(d, 0.0);
    for (std::size_t k = 0; k + 1 < order.size(); ++k)
      for (std::size_t i = 0; i < d; ++i) centroid[i] += vx[order[k]][i];
    for (double& c : centroid) c /= static_cast<double>(d);

    auto along = [&](double coeff) {
      std::vector<double> x(d);
      for (std::size_t i = 0; i < d; ++i)
        x[i] = centroid[i] + coeff * (centroid[i] - vx[worst][i]);
      return clip(std::move(x));
    };

    const std::vector<double> xr = along(1.0);
    const double fr = eval(xr);
    if (exhausted()) break;

    if (fr < vf[best]) {
      const std::vector<double> xe = along(2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        vx[worst] = xe;
        vf[worst] = fe;
      } else {
        vx[worst] = xr;
        vf[worst] = fr;
      }
    } else if (fr < vf[second_worst]) {
      vx[worst] = xr;
      vf[worst] = fr;
    } else {
      bool shrink = false;
      if (fr < vf[worst]) {
        const std::vector<double> xc = along(0.5);  // outside contraction
        const double fc = eval(xc);
        if (fc <= fr) {
          vx[worst] = xc;
          vf[worst] = fc;
        } else {
          shrink = true;
        }
      } else {
        const std::vector<double> xc = along(-0.5);  // inside contraction
        const double fc = eval(xc);
        if (fc < vf[worst]) {
          vx[worst] = xc;
          vf[worst] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t k = 1; k < order.size() && !exhausted(); ++k) {
          const std::size_t idx = order[k];
          for (std::size_t i = 0; i < d; ++i)
            vx[idx][i] = vx[best][i] + 0.5 * (vx[idx][i] - vx[best][i]);
          vx[idx] = clip(std::move(vx[idx]));
          vf[idx] = eval(vx[idx]);
        }
      }
    }
  }

  // budget smaller than d + 1: the simplex never completed, best-seen stands
  return res;
}

inline OptResult optimize_instance(ObjectiveSpec spec, Protocol protocol, std::uint64_t seed) {
  spec.prepare();
  OptResult res;
  if (protocol == Protocol::vanilla_qaoa) {
    const std::size_t dpar = 2 * static_cast<std::size_t>(spec.p);
    std::vector<double> x0(dpar), lo(dpar), hi(dpar);
    Rng rng(seed);
    for (std::size_t i = 0; i < dpar; ++i) x0[i] = rng.uniform(0.0, 0.1);
    constexpr double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < dpar; ++i) {
      const bool is_gamma = i < static_cast<std::size_t>(spec.p);
      lo[i] = is_gamma ? -pi : -pi / 2;
      hi[i] = is_gamma ? pi : pi / 2;
    }
    res = minimize([&spec](const std::vector<double>& x) { return qaoa_objective(x, spec); },
                   x0, lo, hi, spec.budget, seed);
  } else {
    const BezierGapCurve& curve =
        protocol == Protocol::heuristic_mean ? spec.mean_curve : spec.median_curve;
    curve.validate();
    res = minimize(
        [&spec, &curve](const std::vector<double>& x) {
          return heuristic_objective(x[0], x[1], spec, curve);
        },
        {1.0, 1.5}, {1e-3, 0.0}, {50.0, 3.0}, spec.budget, seed);
  }
  res.method = to_string(protocol);
  return res;
}

}  // namespace gapsched
