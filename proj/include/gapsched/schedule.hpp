#pragma once

#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapsched/bezier.hpp"
#include "gapsched/errors.hpp"

namespace gapsched {

// Floor applied to the gap wherever it enters a denominator; degenerate final
// gaps (e.g. unweighted MaxCut targets) must not produce infinite angles.
inline constexpr double kGapFloor = 1e-9;

struct AngleSchedule {
  int p = 0;
  std::vector<double> gammas;  // radians
  std::vector<double> betas;   // radians
  // provenance: either derived from (kappa, q, curve) or "free" (vanilla QAOA)
  bool derived = false;
  double kappa = 0.0;
  double q = 0.0;
  std::string curve_id;
  bool gap_floor_engaged = false;

  void validate() const {
    // p = 0 is the empty schedule (identity circuit); derived schedules have p >= 1
    if (p < 0) throw std::invalid_argument("AngleSchedule: p must be >= 0");
    if (gammas.size() != static_cast<std::size_t>(p) ||
        betas.size() != static_cast<std::size_t>(p))
      throw std::invalid_argument("AngleSchedule: angle sequences must have length p");
    if (derived && (p < 1 || betas.back() != 0.0))
      throw std::invalid_argument("AngleSchedule: derived schedule must end with beta = 0");
  }
};

// gamma_k = s_k * ds / (kappa * g^q(s_k)), beta_k = (1 - s_k) * ds / (kappa *
// g^q(s_k)) with ds = 1/p and s_k = k * ds for k = 1..p. s_p = 1 exactly, so
// the last beta is exactly zero.
template <typename GapFn>
  requires std::invocable<GapFn, double>
inline AngleSchedule derive_angles(int p, double kappa, double q, GapFn&& gap,
                                   std::string curve_id = {}) {
  if (p < 1) throw std::invalid_argument("derive_angles: p must be >= 1");
  if (!(kappa > 0.0)) throw std::invalid_argument("derive_angles: kappa must be > 0");
  if (!(q >= 0.0)) throw std::invalid_argument("derive_angles: q must be >= 0");

  AngleSchedule sched;
  sched.p = p;
  sched.derived = true;
  sched.kappa = kappa;
  sched.q = q;
  sched.curve_id = std::move(curve_id);
  sched.gammas.resize(static_cast<std::size_t>(p));
  sched.betas.resize(static_cast<std::size_t>(p));

  const double ds = 1.0 / p;
  for (int k = 1; k <= p; ++k) {
    const double s_k = static_cast<double>(k) / p;  // k = p gives exactly 1.0
    double g = gap(s_k);
    if (g < kGapFloor) {
      g = kGapFloor;
      sched.gap_floor_engaged = true;
    }
    const double denom = kappa * std::pow(g, q);
    sched.gammas[static_cast<std::size_t>(k - 1)] = s_k * ds / denom;
    sched.betas[static_cast<std::size_t>(k - 1)] = (1.0 - s_k) * ds / denom;
  }
  sched.validate();
  return sched;
}

inline AngleSchedule derive_angles(int p, double kappa, double q, const BezierGapCurve& curve) {
  return derive_angles(
      p, kappa, q, [&curve](double s) { return eval_curve(curve, s); },
      curve.source_profile_id);
}

inline AngleSchedule free_schedule(std::vector<double> gammas, std::vector<double> betas) {
  AngleSchedule sched;
  sched.p = static_cast<int>(gammas.size());
  sched.gammas = std::move(gammas);
  sched.betas = std::move(betas);
  sched.derived = false;
  sched.validate();
  return sched;
}

struct ScheduleTime {
  double time = 0.0;
  bool gap_floor_engaged = false;
};

// Total continuous-evolution time T = integral over [0,1] of ds / (kappa *
// g^q(s)), composite Simpson at the stated resolution. Diagnostic quantity
// linking kappa to physical evolution time.
template <typename GapFn>
  requires std::invocable<GapFn, double>
inline ScheduleTime continuous_schedule_time(double kappa, double q, GapFn&& gap,
                                             int resolution = 1000) {
  if (!(kappa > 0.0))
    throw std::invalid_argument("continuous_schedule_time: kappa must be > 0");
  if (!(q >= 0.0)) throw std::invalid_argument("continuous_schedule_time: q must be >= 0");
  if (resolution < 2) resolution = 2;
  const int segments = resolution % 2 == 0 ? resolution : resolution + 1;

  ScheduleTime out;
  auto integrand = [&](double s) {
    double g = gap(s);
    if (g < kGapFloor) {
      g = kGapFloor;
      out.gap_floor_engaged = true;
    }
    return 1.0 / (kappa * std::pow(g, q));
  };

  const double h = 1.0 / segments;
  double sum = integrand(0.0) + integrand(1.0);
  for (int i = 1; i < segments; ++i)
    sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(static_cast<double>(i) * h);
  out.time = sum * h / 3.0;
  return out;
}

inline ScheduleTime continuous_schedule_time(double kappa, double q, const BezierGapCurve& curve,
                                             int resolution = 1000) {
  return continuous_schedule_time(
      kappa, q, [&curve](double s) { return eval_curve(curve, s); }, resolution);
}

}  // namespace gapsched
